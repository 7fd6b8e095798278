#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "minkqm/hilbert.hpp"
#include "minkqm/probe.hpp"
#include "minkqm/rng.hpp"
#include "minkqm/spacetime.hpp"

namespace minkqm::measurement {

using hilbert::Dims;
using hilbert::Ket;
using hilbert::LinOp;
using hilbert::Vec;
using probe::Axis;
using probe::ProbeLabel;

/// One branch: a formal probe-label assignment tensored with a spin vector.
struct Term {
    std::map<std::string, ProbeLabel> labels;
    Vec spin;
};

/// Finite linear combination of branch terms; the universal state object.
/// Terms with identical label assignments are merged by summing spin parts.
/// Probabilities are always computed as ratios against the total norm, so
/// approximate normalization never leaks into exact outcomes.
struct QState {
    Dims dims;
    std::vector<Term> terms;

    static QState from_ket(const Ket& k);

    double norm2() const;
    void merge(double label_tol = 1e-9);
    void normalize();
    /// The spin vector when the state has a single branch (throws otherwise).
    const Vec& single_spin() const;
};

/// One recorded outcome: what was measured, where, what came out and with
/// which probability. Momentum readouts on probe particle 1 carry the pair
/// sum as well (the quantity that actually discriminates branches).
struct OutcomeRecord {
    std::string op_id;
    std::string observable;
    double eigenvalue = 0.0;
    double probability = 1.0;
    std::optional<double> pair_sum;
    std::optional<spacetime::Event> event;
};

/// Probability for each eigenvalue, sorted by eigenvalue.
struct Distribution {
    std::vector<std::pair<double, double>> p;

    double prob_of(double eigenvalue, double tol = 1e-8) const;
    double total() const;
};

Distribution born(const QState& s, const LinOp& obs);

QState collapse(const QState& s, const LinOp& obs, double outcome);

QState apply_unitary(const QState& s, const LinOp& u);

/// exp(-i k B) applied through the spectral decomposition of hermitian B.
QState external_field(const QState& s, const LinOp& b, double k);

struct JointDistribution {
    std::vector<double> eigs_a;
    std::vector<double> eigs_b;
    std::vector<std::vector<double>> p;  // p[i][j] = P(a_i, b_j)

    Distribution marginal_a() const;
    Distribution marginal_b() const;
    /// sum_ij a_i b_j P(a_i, b_j)
    double correlation() const;
};

/// Joint outcome distribution for commuting observables.
JointDistribution joint_prob(const QState& s, const LinOp& a, const LinOp& b);

/// A controllable action on the far side of the experiment: either an
/// unselective projective measurement or an external-field unitary.
struct MeasureStep {
    LinOp observable;
};
struct UnitaryStep {
    LinOp generator;
    double k = 0.0;
};
using InterventionStep = std::variant<MeasureStep, UnitaryStep>;
using Intervention = std::vector<InterventionStep>;

/// Max total-variation distance between the obs_a marginal with and without
/// each intervention. With `enforce_commutation` the audit refuses
/// interventions that fail local commutativity; switching it off lets the
/// caller exhibit the signaling a non-commuting scheme would allow.
double no_signaling_audit(const QState& s, const LinOp& obs_a,
                          const std::vector<Intervention>& interventions,
                          bool enforce_commutation = true);

struct SigmaTotSqReport {
    double p_noflip = 0.0;  // P(sigma_z(1) = -1) without the remote flip
    double p_flip = 0.0;    // same with the flip before the total-spin measurement
};

/// Prepare |uu>, optionally flip spin 2, measure (sigma_tot)^2 projectively,
/// then ask for sigma_z(1) = -1. Uses the algebraic eigenspace projectors
/// (1 -+ SWAP)/2 of the total-spin square, so the report is exact.
SigmaTotSqReport sigma_tot_sq_demo();

/// Local probe kick exp(-i F q sigma_axis) on one particle of a pair: each
/// sigma eigenbranch m shifts the pair's momentum sum by -F*m.
QState kick(const QState& s, const std::string& pair_id, int particle, Axis axis, double strength);

struct PiMeasurement {
    double value = 0.0;
    double probability = 1.0;
    double pair_sum = 0.0;  // only meaningful for particle-1 readouts
    QState after;
};

/// Momentum readout on one probe particle. Particle 2 takes a sampled value
/// (pinned or drawn from `rng`); particle 1 is a genuine branch measurement
/// whose outcome distribution follows the branch weights.
PiMeasurement measure_pi(const QState& s, const std::string& pair_id, int particle,
                         Rng& rng, std::optional<double> pinned = std::nullopt);

/// Branch weights of particle-1 readout outcomes, keyed by pair shift.
std::vector<std::pair<double, double>> pi1_distribution(const QState& s,
                                                        const std::string& pair_id);

LinOp axis_operator(Axis axis);

}  // namespace minkqm::measurement
