#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "minkqm/measurement.hpp"
#include "minkqm/probe.hpp"
#include "minkqm/rng.hpp"
#include "minkqm/spacetime.hpp"

namespace minkqm::scenarios {

using measurement::Distribution;
using measurement::LinOp;
using measurement::OutcomeRecord;
using measurement::QState;
using probe::Axis;
using probe::ProbeRegister;
using spacetime::Event;
using spacetime::Foliation;
using spacetime::Hyperplane;

struct KickAction {
    std::string pair_id;
    int particle = 1;
    Axis axis = Axis::z;
    double strength = 1.0;
};

struct SpinUnitaryAction {
    LinOp op;  // on the full spin space
};

struct SpinMeasureAction {
    LinOp observable;  // on the full spin space
    std::string observable_name;
};

struct PiMeasureAction {
    std::string pair_id;
    int particle = 1;
};

using Action = std::variant<KickAction, SpinUnitaryAction, SpinMeasureAction, PiMeasureAction>;

/// An interaction or measurement anchored at a space-time event.
struct TimelineOp {
    std::string id;
    Event event;
    Action action;
};

/// Collapse schemes. SolutionI treats the state as a functional on space-like
/// surfaces (queried through state_on_surface); SolutionII collapses along the
/// leaves of a distinguished foliation; HellwigKraus along backward light
/// cones of the measurement events.
struct SolutionI {
    std::vector<Hyperplane> surfaces;
};
struct SolutionII {
    Foliation foliation;
};
struct HellwigKraus {};
using Scheme = std::variant<SolutionI, SolutionII, HellwigKraus>;

struct Scenario {
    QState initial;
    ProbeRegister probes;
    std::vector<TimelineOp> ops;
    Scheme scheme = SolutionII{spacetime::FlatFamily{}};
    /// Outcomes pinned by op id: eigenvalue for spin measurements, the
    /// sampled value for pi2 readouts, the pair sum for pi1 readouts.
    std::map<std::string, double> pinned;
};

struct Transcript {
    std::vector<OutcomeRecord> outcomes;
    std::vector<std::size_t> order;  // op indices in applied order
    std::vector<QState> states;      // state after each crossed leaf, same order
    QState final_state;
    double weight = 1.0;  // product of recorded probabilities

    std::optional<double> value_of(const std::string& op_id) const;
    std::optional<double> sum_of(const std::string& op_id) const;
};

/// True when the actions' operators commute (spin factors as matrices, probe
/// factors through the canonical algebra of the pair variables).
bool actions_commute(const Scenario& s, const TimelineOp& a, const TimelineOp& b);

/// Rejects scenarios with non-commuting operators at space-like separation;
/// also checks probe references, kick strengths and foliation consistency.
void validate(const Scenario& s);

/// Op indices in leaf-crossing order of the scheme, with same-leaf ties
/// resolved in input order (non-commuting ties are rejected).
std::vector<std::size_t> sweep(const Scenario& s);

Transcript run(const Scenario& s, std::uint64_t seed);
Transcript run(const Scenario& s, Rng& rng);

struct SurfaceState {
    QState state;
    std::vector<std::string> excluded_on_surface;  // ops whose event lies exactly on the surface
};

/// The wave-function the surface functional assigns to a space-like plane:
/// exactly the ops strictly in the surface's past, in sweep order,
/// conditioned on the transcript's outcomes.
SurfaceState state_on_surface(const Transcript& t, const Scenario& s, const Hyperplane& sigma);

/// Backward-light-cone prescription: the state at space-time point x is the
/// initial state hit by the projectors of every measurement event not in the
/// absolute future of x, chronologically ordered (earlier first).
QState hk_state_at_point(const Scenario& s, const Transcript& t, const Event& x);

/// Exact joint outcome distribution, branching over every unpinned
/// measurement, with ops applied in the given order. pi2 readouts use the
/// value 0 (the value carries no physics). Keys are op-id -> value maps.
struct OutcomeKey {
    std::vector<std::pair<std::string, long long>> entries;  // value scaled by 1e6
    auto operator<=>(const OutcomeKey&) const = default;
};
std::map<OutcomeKey, double> enumerate_distribution(const Scenario& s,
                                                    const std::vector<std::size_t>& order);

/// All op orders consistent with the scheme's causal/leaf structure (used by
/// the order-independence audits; factorial in the spacelike clusters).
std::vector<std::vector<std::size_t>> admissible_orders(const Scenario& s, std::size_t limit = 720);

// --- named experiments -----------------------------------------------------

/// Singlet correlation E(a,b) for spin measurements along unit vectors a, b.
double eprb_correlation(const std::array<double, 3>& a, const std::array<double, 3>& b);

/// |E(a,b) - E(a,b') + E(a',b) + E(a',b')|.
double chsh(const std::array<double, 3>& a, const std::array<double, 3>& a2,
            const std::array<double, 3>& b, const std::array<double, 3>& b2);

/// EPRB run layout: source at the origin, magnets at (1, -+1).
Scenario eprb_scenario(const std::array<double, 3>& axis_a, const std::array<double, 3>& axis_b);

struct EprbSample {
    int outcome_a = 0;
    int outcome_b = 0;
};
EprbSample sample_eprb(const std::array<double, 3>& a, const std::array<double, 3>& b, Rng& rng);

struct AaResult {
    std::array<double, 3> sums{};       // pi1+pi2 per axis (x, y, z)
    QState post;                        // state after the readouts
    double fidelity_to_initial = 0.0;   // spin part against the initial ket
    Transcript transcript;
};

/// Three probe pairs, simultaneous kicks on both particles per axis, then
/// momentum readouts. From the singlet all sums are zero and the state is
/// returned undisturbed.
AaResult aa_simultaneous(const hilbert::Ket& initial, std::uint64_t seed, double strength = 1.0);

/// Probability that all three pair sums come out zero, computed exactly from
/// the branch weights (no sampling).
double aa_verification_probability(const hilbert::Ket& initial, double strength = 1.0);

struct AaDisplacedResult {
    QState intermediate;  // between the two kicks (after the pi2 readout)
    std::vector<std::pair<double, double>> intermediate_branches;  // (shift, weight)
    double pi2 = 0.0;
    double pi1 = 0.0;
    double sum = 0.0;
    QState final_state;
    double fidelity_to_singlet = 0.0;
};

/// Kick(2), pi2 readout, kick(1), pi1 readout, in that crossing order.
AaDisplacedResult aa_time_displaced(std::uint64_t seed, double strength = 1.0,
                                    std::optional<double> pinned_pi2 = std::nullopt);

struct AaFoliationResult {
    double sum = 0.0;          // pair sum for the chosen axis
    double sz2 = 0.0;          // conditioned magnet outcome on particle 2
    double p_sz1_plus = 0.0;   // probability of sigma_z(1) = +1 at the end
    QState final_state;
    double fidelity_to_up_down = 0.0;
    Transcript transcript;
};

/// The distinguished-foliation ordering: kick(2), pi2 readout, magnet on
/// particle 2 (pinned to sz2), kick(1), pi1 readout, magnet on particle 1.
AaFoliationResult aa_under_foliation(Axis axis, std::uint64_t seed, double sz2 = -1.0,
                                     double strength = 1.0);

enum class MonitorLayout {
    interleaved,    // primed kick(2), primed pi2, full unprimed procedure, primed kick(1), pi1
    no_primed,      // unprimed procedure alone
    primed_first,   // primed pair completes before the unprimed procedure
};

struct MonitoringResult {
    double p_all_zero = 1.0;  // probability the unprimed readout sums all vanish
};

/// Two monitors in different frames at once: the primed total-spin-z pair
/// interleaves with the full unprimed procedure.
MonitoringResult monitoring_conflict(MonitorLayout layout = MonitorLayout::interleaved,
                                     double strength = 1.0);

struct HkRefutationResult {
    hilbert::Ket hk_wing_state;      // backward-cone state on the just-before slice
    double p_verify_hk = 0.0;        // all-zero probability from that state
    double p_verify_schemes = 0.0;   // same from the intact singlet
    double mass = 0.0;               // probability gap
};

/// EPRB with pinned outcomes plus a total-spin verification just before the
/// magnets: the backward-light-cone state makes the verification fail with
/// finite probability, the surface/foliation schemes keep it certain.
HkRefutationResult hk_refutation();

struct ReducedDensityResult {
    hilbert::Mat rho_sigma_red;  // surface before the magnet readout: 1/2 * id
    hilbert::Mat rho_xi_red;     // surface after it: diag(1, 0)
};

/// Reduced density matrix of particle 1 on two nearly identical surfaces that
/// differ only around the particle-2 measurement event. Built through the
/// algebraic singlet projector so the entries are exact.
ReducedDensityResult reduced_density_demo();

struct ThreeRegionResult {
    hilbert::Ket k_frame_mid;       // history in the lab frame
    hilbert::Ket k_prime_frame_mid; // history in the boosted frame
};

/// One particle supported on three separated regions, two negative detections
/// at space-like separation: the two frames' histories contain states that
/// are not Lorentz transforms of each other.
ThreeRegionResult three_region_demo();

// --- scenario files ----------------------------------------------------------

/// Parse a schema-1 scenario document (JSON). Unknown fields are rejected.
Scenario load_scenario(const std::string& json_text);
std::string transcript_json(const Transcript& t);

}  // namespace minkqm::scenarios
