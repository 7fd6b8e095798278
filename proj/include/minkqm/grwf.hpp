#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "minkqm/rng.hpp"
#include "minkqm/spacetime.hpp"

namespace minkqm::grwf {

using Cplx = std::complex<double>;

/// Hit rate per particle per unit time and localization width, in lattice /
/// desk-scale units. The physical magnitudes (1e-16 per second, 1e-5 cm) are
/// far outside anything testable on a desk.
struct GrwParams {
    double lambda = 0.5;
    double alpha = 1.5;
};

/// N distinguishable particles on a periodic 1D lattice of M sites.
/// Configuration index is sum_j x_j * M^j.
struct LatticeWave {
    int particles = 1;
    int sites = 2;
    double dx = 1.0;
    Eigen::VectorXcd amps;

    static LatticeWave uniform(int particles, int sites, double dx = 1.0);
    Eigen::Index dim() const { return amps.size(); }
    double site_distance(int a, int b) const;  // periodic
};

struct Flash {
    int particle = 0;
    double time = 0.0;
    int site = 0;
};

struct HitResult {
    double density = 0.0;  // probability of this hit site, sums to 1 over sites
    LatticeWave wave;      // collapsed and renormalized
};

/// Gaussian localization of particle j at the given site.
HitResult hit(const LatticeWave& w, int particle, int site, const GrwParams& p);

/// Hit probability over all sites for one particle (sums to 1).
std::vector<double> hit_density(const LatticeWave& w, int particle, const GrwParams& p);

/// Poisson hitting process: per-particle exponential waiting times, sites
/// drawn from the running hit densities.
std::vector<Flash> sample_flashes(const LatticeWave& w0, double horizon, const GrwParams& p,
                                  Rng& rng);

/// Probability integral transform of the per-particle waiting times against
/// the exponential law conditioned on the remaining window, so completed gaps
/// in a finite horizon are exactly Uniform(0,1) under the hitting law. A plain
/// transform of the raw gaps would be biased short by the window truncation.
std::vector<double> uniformized_gaps(const std::vector<Flash>& history, int particles,
                                     double horizon, double lambda);

/// Optional two-particle coupling applied between scheduled hits; the
/// generator hops both particles at once so it is neither diagonal nor a
/// product, which is what breaks relative time translation invariance.
struct Coupling {
    double strength = 1.0;
};

struct FlashSchedule {
    std::vector<std::pair<int, double>> entries;  // (particle, time)
};

struct JointFlashDistribution {
    std::vector<int> shape;      // sites per scheduled flash
    std::vector<double> probs;   // row-major over site tuples
    double prob_of(const std::vector<int>& sites) const;
};

/// Exact enumeration of the joint site distribution for a fixed hit schedule.
/// Free evolution is the identity unless a coupling is supplied.
JointFlashDistribution joint_flash_distribution(const LatticeWave& w0, FlashSchedule schedule,
                                                const GrwParams& p,
                                                std::optional<Coupling> coupling = std::nullopt);

/// M(x) = sum_i m_i * (marginal |psi|^2 of particle i at x).
std::vector<double> mass_density(const LatticeWave& w, const std::vector<double>& masses);

/// |psi|^2 as a Gaussian in the rapidity coordinate of the current future
/// hyperboloid; boosts act by shifting the mean.
struct RapidityPacket {
    double mean_chi = 0.0;
    double sigma_chi = 1.0;

    RapidityPacket boosted(double rapidity) const { return {mean_chi - rapidity, sigma_chi}; }
};

/// Transport of the packet from the hyperboloid of the previous flash to the
/// next one. The shipped dynamics is the identity map of the packet family; a
/// genuine 1+1D hypersurface propagator can be plugged in here.
using PacketPropagator =
    std::function<RapidityPacket(const RapidityPacket& packet, const spacetime::Event& from_vertex,
                                 const spacetime::Event& to_vertex)>;

/// Joint density (per unit spacetime 2-volume per flash) of a single
/// particle's flash history after the seed, under the covariant hitting law:
/// exponential proper waiting times between hyperboloids, Gaussian collapse
/// in arc length on each. Returns 0 whenever a flash leaves the predecessor's
/// future.
double rgrwf_density(const spacetime::Event& seed, const std::vector<spacetime::Event>& flashes,
                     const RapidityPacket& psi0, const GrwParams& p,
                     const PacketPropagator& propagate = {});

}  // namespace minkqm::grwf
