#include "minkqm/grwf.hpp"

#include <algorithm>
#include <cmath>

namespace minkqm::grwf {

using spacetime::Event;

LatticeWave LatticeWave::uniform(int particles, int sites, double dx) {
    LatticeWave w;
    w.particles = particles;
    w.sites = sites;
    w.dx = dx;
    Eigen::Index dim = 1;
    for (int j = 0; j < particles; ++j) dim *= sites;
    w.amps = Eigen::VectorXcd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    return w;
}

double LatticeWave::site_distance(int a, int b) const {
    const int d = std::abs(a - b);
    return dx * std::min(d, sites - d);
}

namespace {

void check_params(const GrwParams& p) {
    if (p.lambda <= 0.0 || p.alpha <= 0.0)
        throw ValidationError("hit rate and localization width must be positive");
}

/// Squared localization profile, normalized so the profiles over all centers
/// sum to one at every site (exact on the periodic lattice).
std::vector<double> profile_sq(const LatticeWave& w, int center, const GrwParams& p) {
    std::vector<double> g(w.sites);
    double z = 0.0;
    for (int k = 0; k < w.sites; ++k) {
        const double d = w.site_distance(k, 0);
        z += std::exp(-d * d / (2.0 * p.alpha * p.alpha));
    }
    for (int x = 0; x < w.sites; ++x) {
        const double d = w.site_distance(x, center);
        g[x] = std::exp(-d * d / (2.0 * p.alpha * p.alpha)) / z;
    }
    return g;
}

Eigen::Index stride_of(const LatticeWave& w, int particle) {
    Eigen::Index stride = 1;
    for (int j = 0; j < particle; ++j) stride *= w.sites;
    return stride;
}

}  // namespace

HitResult hit(const LatticeWave& w, int particle, int site, const GrwParams& p) {
    check_params(p);
    const auto g = profile_sq(w, site, p);
    const Eigen::Index stride = stride_of(w, particle);
    HitResult out;
    out.wave = w;
    double weight = 0.0;
    for (Eigen::Index idx = 0; idx < w.dim(); ++idx) {
        const int x = static_cast<int>((idx / stride) % w.sites);
        const double k = std::sqrt(g[x]);
        out.wave.amps(idx) *= k;
        weight += std::norm(out.wave.amps(idx));
    }
    out.density = weight / w.amps.squaredNorm();
    if (weight > 0.0) out.wave.amps /= std::sqrt(weight);
    return out;
}

std::vector<double> hit_density(const LatticeWave& w, int particle, const GrwParams& p) {
    check_params(p);
    std::vector<double> marg(w.sites, 0.0);
    const Eigen::Index stride = stride_of(w, particle);
    for (Eigen::Index idx = 0; idx < w.dim(); ++idx) {
        const int x = static_cast<int>((idx / stride) % w.sites);
        marg[x] += std::norm(w.amps(idx));
    }
    std::vector<double> density(w.sites, 0.0);
    for (int center = 0; center < w.sites; ++center) {
        const auto g = profile_sq(w, center, p);
        double d = 0.0;
        for (int x = 0; x < w.sites; ++x) d += g[x] * marg[x];
        density[center] = d;
    }
    return density;
}

std::vector<Flash> sample_flashes(const LatticeWave& w0, double horizon, const GrwParams& p,
                                  Rng& rng) {
    check_params(p);
    LatticeWave wave = w0;
    std::vector<double> next(w0.particles);
    for (int j = 0; j < w0.particles; ++j) next[j] = rng.exponential(p.lambda);

    std::vector<Flash> flashes;
    while (true) {
        int j = 0;
        for (int k = 1; k < w0.particles; ++k)
            if (next[k] < next[j]) j = k;
        if (next[j] > horizon) break;
        const auto density = hit_density(wave, j, p);
        const int site = static_cast<int>(rng.pick(density));
        wave = hit(wave, j, site, p).wave;
        flashes.push_back({j, next[j], site});
        next[j] += rng.exponential(p.lambda);
    }
    return flashes;
}

std::vector<double> uniformized_gaps(const std::vector<Flash>& history, int particles,
                                     double horizon, double lambda) {
    std::vector<double> last(static_cast<std::size_t>(particles), 0.0);
    std::vector<double> u;
    for (const auto& f : history) {
        const double prev = last[static_cast<std::size_t>(f.particle)];
        const double gap = f.time - prev;
        const double window = horizon - prev;
        u.push_back((1.0 - std::exp(-lambda * gap)) / (1.0 - std::exp(-lambda * window)));
        last[static_cast<std::size_t>(f.particle)] = f.time;
    }
    return u;
}

double JointFlashDistribution::prob_of(const std::vector<int>& sites) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) idx = idx * shape[k] + sites[k];
    return probs[idx];
}

namespace {

Eigen::MatrixXcd coupling_unitary(const LatticeWave& w, double strength, double dt) {
    // generator: simultaneous nearest-neighbor hop of both particles
    const int m = w.sites;
    Eigen::MatrixXd hop = Eigen::MatrixXd::Zero(m, m);
    for (int x = 0; x < m; ++x) {
        hop(x, (x + 1) % m) = 1.0;
        hop((x + 1) % m, x) = 1.0;
    }
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m * m, m * m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d)
                    h(a * m + b, c * m + d) = hop(b, d) * hop(a, c);  // index = x1 + m*x2
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(m * m, m * m);
    for (int k = 0; k < m * m; ++k) {
        const Cplx phase = std::exp(Cplx(0.0, -strength * dt * solver.eigenvalues()(k)));
        const Eigen::VectorXcd v = solver.eigenvectors().col(k).cast<Cplx>();
        u += phase * v * v.adjoint();
    }
    return u;
}

}  // namespace

JointFlashDistribution joint_flash_distribution(const LatticeWave& w0, FlashSchedule schedule,
                                                const GrwParams& p,
                                                std::optional<Coupling> coupling) {
    if (schedule.entries.size() > 8 || w0.sites > 8)
        throw TooLarge("joint enumeration is limited to 8 flashes on at most 8 sites");
    if (coupling && w0.particles != 2)
        throw TooLarge("the coupling step is defined for two particles");
    std::stable_sort(schedule.entries.begin(), schedule.entries.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });

    JointFlashDistribution out;
    for (std::size_t k = 0; k < schedule.entries.size(); ++k) out.shape.push_back(w0.sites);
    std::size_t total = 1;
    for (int s : out.shape) total *= static_cast<std::size_t>(s);
    out.probs.assign(total, 0.0);

    struct Node {
        std::size_t depth;
        std::size_t index;
        double weight;
        LatticeWave wave;
        double time;
    };
    std::vector<Node> stack{{0, 0, 1.0, w0, schedule.entries.empty() ? 0.0 : schedule.entries[0].second}};
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        if (node.depth == schedule.entries.size()) {
            out.probs[node.index] += node.weight;
            continue;
        }
        const auto [particle, time] = schedule.entries[node.depth];
        LatticeWave wave = std::move(node.wave);
        if (coupling && node.depth > 0) {
            const double dt = time - node.time;
            if (dt > 0.0) {
                const auto u = coupling_unitary(wave, coupling->strength, dt);
                wave.amps = u * wave.amps;
            }
        }
        for (int site = 0; site < w0.sites; ++site) {
            auto res = hit(wave, particle, site, p);
            if (res.density <= 0.0) continue;
            stack.push_back({node.depth + 1, node.index * w0.sites + site,
                             node.weight * res.density, std::move(res.wave), time});
        }
    }
    return out;
}

std::vector<double> mass_density(const LatticeWave& w, const std::vector<double>& masses) {
    if (static_cast<int>(masses.size()) != w.particles)
        throw DimMismatch("one mass per particle required");
    std::vector<double> density(w.sites, 0.0);
    const double norm = w.amps.squaredNorm();
    for (int j = 0; j < w.particles; ++j) {
        const Eigen::Index stride = stride_of(w, j);
        for (Eigen::Index idx = 0; idx < w.dim(); ++idx) {
            const int x = static_cast<int>((idx / stride) % w.sites);
            density[x] += masses[j] * std::norm(w.amps(idx)) / norm;
        }
    }
    return density;
}

double rgrwf_density(const Event& seed, const std::vector<Event>& flashes,
                     const RapidityPacket& psi0, const GrwParams& p,
                     const PacketPropagator& propagate) {
    check_params(p);
    Event vertex = seed;
    RapidityPacket packet = psi0;
    double density = 1.0;
    for (const Event& flash : flashes) {
        if (!spacetime::in_future(vertex, flash)) return 0.0;  // light-cone indicator
        const double tau = std::sqrt(spacetime::interval(flash, vertex));
        const spacetime::Hyperboloid hb{vertex, tau};
        const double chi = hb.rapidity_of(flash);

        // collapse weight: Gaussian localization of width alpha in arc length
        // against the packet, all in the rapidity coordinate
        const double loc_sigma = p.alpha / tau;  // arc-length width mapped to rapidity
        const double var = packet.sigma_chi * packet.sigma_chi + loc_sigma * loc_sigma;
        const double gap = chi - packet.mean_chi;
        const double position_density =
            std::exp(-0.5 * gap * gap / var) / (tau * std::sqrt(2.0 * M_PI * var));
        density *= p.lambda * std::exp(-p.lambda * tau) * position_density;

        // posterior packet after the Gaussian collapse
        const double prec = 1.0 / (packet.sigma_chi * packet.sigma_chi) +
                            1.0 / (loc_sigma * loc_sigma);
        const double mean = (packet.mean_chi / (packet.sigma_chi * packet.sigma_chi) +
                             chi / (loc_sigma * loc_sigma)) /
                            prec;
        packet = {mean, std::sqrt(1.0 / prec)};
        if (propagate) packet = propagate(packet, vertex, flash);
        vertex = flash;
    }
    return density;
}

}  // namespace minkqm::grwf
