#pragma once

#include <complex>
#include <variant>
#include <vector>

#include "minkqm/rng.hpp"
#include "minkqm/spacetime.hpp"

namespace minkqm::bohm {

using Cplx = std::complex<double>;

/// Freely spreading Gaussian with closed-form value and gradient.
struct GaussianPacket {
    double center = 0.0;
    double momentum = 0.0;
    double width = 1.0;  // initial spatial width sigma_0
    double mass = 1.0;

    Cplx value(double x, double t) const;
    Cplx gradient(double x, double t) const;
    double spread(double t) const;  // sigma(t)
};

struct PlaneWave {
    double momentum = 1.0;
    double mass = 1.0;
};

/// Finite superposition of Gaussians with equal masses.
struct Superposition {
    std::vector<std::pair<Cplx, GaussianPacket>> parts;
};

using WavePacket = std::variant<GaussianPacket, PlaneWave, Superposition>;

Cplx value(const WavePacket& psi, double x, double t);
Cplx gradient(const WavePacket& psi, double x, double t);
double mass_of(const WavePacket& psi);
/// Scale of the packet's largest amplitude at time t (node detection).
double peak_scale(const WavePacket& psi, double t);

/// Guidance velocity Im(grad psi / psi) / m. Throws NearNode below
/// 1e-10 * peak.
double velocity(const WavePacket& psi, double x, double t);

struct StepControl {
    double step = 2e-3;
    double min_step = 1e-9;
    double node_tolerance = 1e-10;
};

struct Trajectory {
    int id = 0;
    std::vector<std::pair<double, double>> samples;  // (t, x)

    double final_position() const { return samples.back().second; }
};

struct IntegrationResult {
    Trajectory trajectory;
    double error_estimate = 0.0;  // step-halving comparison at the endpoint
};

/// Classic 4th-order integration of dx/dt = v(x, t) with step halving near
/// nodes; aborts with NodeEncounter when halving bottoms out.
IntegrationResult integrate(const WavePacket& psi, double q0, double t0, double t1,
                            const StepControl& ctl = {});

/// Draw a position from |psi(.,t)|^2 (rejection sampling for superpositions).
double sample_position(const WavePacket& psi, double t, Rng& rng);

struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

/// Kolmogorov-Smirnov p-value for n_samples trajectories transported from
/// |psi(.,t0)|^2 to t1 against |psi(.,t1)|^2.
KsResult equivariance_test(const WavePacket& psi, int n_samples, double t0, double t1,
                           std::uint64_t seed);

/// KS helper shared with the flash-process tests.
double ks_p_value(double statistic, int n);

/// Two-component free particle in 1+1D as a superposition of positive-energy
/// plane-wave modes.
struct DiracPacket {
    struct Mode {
        double momentum = 0.0;
        Cplx amplitude = 1.0;
    };
    std::vector<Mode> modes;
    double mass = 1.0;

    static double energy(double momentum, double mass);
};

struct DiracCurrent {
    double j0 = 0.0;
    double j1 = 0.0;
};

DiracCurrent current(const DiracPacket& psi, double x, double t);

/// v = j1/j0; |v| <= 1 always. Throws ZeroDensity at nodes.
double bohm_dirac_velocity(const DiracPacket& psi, double x, double t);

Trajectory bohm_dirac_trajectory(const DiracPacket& psi, double x0, double t0, double t1,
                                 double step = 2e-3);

/// One leaf-to-leaf advance of the flat-foliation guidance law
/// dX/ds parallel to j(X): integrates across the gap in the leaf offset.
/// Crossings must sit on the current leaf.
std::vector<spacetime::Event> hbdm_step(const spacetime::FlatFamily& foliation,
                                        const std::vector<DiracPacket>& packets,
                                        const std::vector<spacetime::Event>& crossings,
                                        std::size_t leaf_index, int substeps = 16);

/// World lines across the whole leaf family; one row per particle.
std::vector<std::vector<spacetime::Event>> hbdm_worldlines(
    const spacetime::FlatFamily& foliation, const std::vector<DiracPacket>& packets,
    std::vector<spacetime::Event> crossings, int substeps = 16);

/// Rest frame of the total wave-function momentum: n = <P>/|<P>| from the
/// plane-wave mode weights.
spacetime::Event struyve_frame(const std::vector<DiracPacket>& packets);

}  // namespace minkqm::bohm
