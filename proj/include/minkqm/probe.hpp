#pragma once

#include <map>
#include <string>
#include <variant>

#include "minkqm/errors.hpp"

namespace minkqm::probe {

enum class Axis { x, y, z };

const char* to_string(Axis a);

/// Improper EPR pair state |q1-q2=0; pi1+pi2=shift>. The probe pair is a
/// formal orthonormal label: only the accumulated shift carries physics.
struct Epr {
    double shift = 0.0;  // pi1 + pi2
};

/// Particle 2's momentum has been read out; particle 1 is left in the
/// improper eigenstate pi1 = shift - pi2. The two pieces are kept separate so
/// readout combinations stay exact.
struct Collapsed {
    double shift = 0.0;
    double pi2 = 0.0;

    double pi1() const { return shift - pi2; }
};

/// Both readouts done; the pair carries no further state.
struct Consumed {};

using ProbeLabel = std::variant<Epr, Collapsed, Consumed>;

ProbeLabel prepare_epr();

/// Momentum translation of one probe particle by xi. Shifts on an EPR label
/// accumulate in the net sum; after collapse only particle 1 can be shifted.
ProbeLabel shift(const ProbeLabel& label, int particle, double xi);

struct Pi2Readout {
    double value = 0.0;   // sampled pi2
    ProbeLabel after;
};

/// Read out particle 2. The sampled value is supplied by the caller (the
/// improper marginal fixes no distribution); the selection rule pins
/// pi1 = shift - pi2.
Pi2Readout measure_pi2(const ProbeLabel& label, double sampled_pi2);

struct Pi1Readout {
    double value = 0.0;     // pi1 = shift - pi2
    double pair_sum = 0.0;  // pi1 + pi2 = shift, exact
    ProbeLabel after;
};

Pi1Readout measure_pi1(const ProbeLabel& label);

/// Formal orthonormality: unit overlap for equal labels, zero otherwise.
bool labels_equal(const ProbeLabel& a, const ProbeLabel& b, double tol = 1e-9);
double overlap(const ProbeLabel& a, const ProbeLabel& b, double tol = 1e-9);

/// Probe pairs in play, at most one per axis within a procedure group.
struct ProbeRegister {
    struct Entry {
        Axis axis;
        std::string group;
    };
    std::map<std::string, Entry> pairs;

    void add(const std::string& pair_id, Axis axis, const std::string& group = "default");
    bool has(const std::string& pair_id) const { return pairs.count(pair_id) != 0; }
    Axis axis_of(const std::string& pair_id) const;
};

}  // namespace minkqm::probe
