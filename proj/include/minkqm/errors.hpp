#pragma once

#include <stdexcept>
#include <string>

namespace minkqm {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// geometry
struct InconsistentOrder : Error { using Error::Error; };
struct OffSurface : Error { using Error::Error; };

// linear algebra
struct DimMismatch : Error { using Error::Error; };
struct NotHermitian : Error { using Error::Error; };
struct NotUnit : Error { using Error::Error; };
struct BadDensity : Error { using Error::Error; };

// probe labels
struct ConsumedLabel : Error { using Error::Error; };
struct ShiftOnMeasuredParticle : Error { using Error::Error; };
struct AlreadyCollapsed : Error { using Error::Error; };
struct NotCollapsed : Error { using Error::Error; };

// state engine
struct ZeroProbabilityOutcome : Error { using Error::Error; };
struct NonCommuting : Error { using Error::Error; };

// scenarios
struct ValidationError : Error { using Error::Error; };
struct ZeroProbabilityConditioning : Error { using Error::Error; };

// flash dynamics
struct TooLarge : Error { using Error::Error; };

// trajectories
struct NearNode : Error { using Error::Error; };
struct NodeEncounter : Error { using Error::Error; };
struct ZeroDensity : Error { using Error::Error; };
struct LeafSkipped : Error { using Error::Error; };

}  // namespace minkqm
