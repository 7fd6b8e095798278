#include "minkqm/bohm.hpp"

#include <algorithm>
#include <cmath>

namespace minkqm::bohm {

using spacetime::Event;
using spacetime::FlatFamily;

Cplx GaussianPacket::value(double x, double t) const {
    // sigma_t = sigma_0 (1 + i t / (2 m sigma_0^2))
    const Cplx sigma_t = width * Cplx(1.0, t / (2.0 * mass * width * width));
    const double xc = center + momentum / mass * t;
    const Cplx norm = std::pow(2.0 * M_PI * sigma_t * sigma_t, -0.25);
    const Cplx arg = -(x - xc) * (x - xc) / (4.0 * width * sigma_t) +
                     Cplx(0, 1) * (momentum * (x - center) - 0.5 * momentum * momentum / mass * t);
    return norm * std::exp(arg);
}

Cplx GaussianPacket::gradient(double x, double t) const {
    const Cplx sigma_t = width * Cplx(1.0, t / (2.0 * mass * width * width));
    const double xc = center + momentum / mass * t;
    const Cplx dlog = -(x - xc) / (2.0 * width * sigma_t) + Cplx(0, momentum);
    return dlog * value(x, t);
}

double GaussianPacket::spread(double t) const {
    const double r = t / (2.0 * mass * width * width);
    return width * std::sqrt(1.0 + r * r);
}

Cplx value(const WavePacket& psi, double x, double t) {
    if (const auto* g = std::get_if<GaussianPacket>(&psi)) return g->value(x, t);
    if (const auto* p = std::get_if<PlaneWave>(&psi)) {
        const double phase = p->momentum * x - 0.5 * p->momentum * p->momentum / p->mass * t;
        return std::exp(Cplx(0, phase));
    }
    const auto& s = std::get<Superposition>(psi);
    Cplx sum = 0.0;
    for (const auto& [c, g] : s.parts) sum += c * g.value(x, t);
    return sum;
}

Cplx gradient(const WavePacket& psi, double x, double t) {
    if (const auto* g = std::get_if<GaussianPacket>(&psi)) return g->gradient(x, t);
    if (const auto* p = std::get_if<PlaneWave>(&psi))
        return Cplx(0, p->momentum) * value(psi, x, t);
    const auto& s = std::get<Superposition>(psi);
    Cplx sum = 0.0;
    for (const auto& [c, g] : s.parts) sum += c * g.gradient(x, t);
    return sum;
}

double mass_of(const WavePacket& psi) {
    if (const auto* g = std::get_if<GaussianPacket>(&psi)) return g->mass;
    if (const auto* p = std::get_if<PlaneWave>(&psi)) return p->mass;
    const auto& s = std::get<Superposition>(psi);
    return s.parts.empty() ? 1.0 : s.parts.front().second.mass;
}

double peak_scale(const WavePacket& psi, double t) {
    if (const auto* g = std::get_if<GaussianPacket>(&psi))
        return std::pow(2.0 * M_PI * g->spread(t) * g->spread(t), -0.25);
    if (std::holds_alternative<PlaneWave>(psi)) return 1.0;
    const auto& s = std::get<Superposition>(psi);
    double sum = 0.0;
    for (const auto& [c, g] : s.parts)
        sum += std::abs(c) * std::pow(2.0 * M_PI * g.spread(t) * g.spread(t), -0.25);
    return sum;
}

double velocity(const WavePacket& psi, double x, double t) {
    const Cplx v = value(psi, x, t);
    if (std::abs(v) < 1e-10 * peak_scale(psi, t))
        throw NearNode("wave amplitude below the node tolerance");
    return std::imag(gradient(psi, x, t) / v) / mass_of(psi);
}

IntegrationResult integrate(const WavePacket& psi, double q0, double t0, double t1,
                            const StepControl& ctl) {
    const auto advance = [&](double base_step) {
        Trajectory traj;
        double x = q0;
        double t = t0;
        traj.samples.emplace_back(t, x);
        const double direction = t1 >= t0 ? 1.0 : -1.0;
        while (direction * (t1 - t) > 1e-15) {
            double h = std::min(base_step, direction * (t1 - t)) * direction;
            while (true) {
                try {
                    const double k1 = velocity(psi, x, t);
                    const double k2 = velocity(psi, x + 0.5 * h * k1, t + 0.5 * h);
                    const double k3 = velocity(psi, x + 0.5 * h * k2, t + 0.5 * h);
                    const double k4 = velocity(psi, x + h * k3, t + h);
                    x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
                    t += h;
                    break;
                } catch (const NearNode&) {
                    h *= 0.5;
                    if (std::abs(h) < ctl.min_step)
                        throw NodeEncounter("trajectory ran into a node at t = " +
                                            std::to_string(t));
                }
            }
            traj.samples.emplace_back(t, x);
        }
        return traj;
    };

    IntegrationResult out;
    out.trajectory = advance(ctl.step);
    const Trajectory fine = advance(ctl.step * 0.5);
    out.error_estimate =
        std::abs(out.trajectory.final_position() - fine.final_position());
    return out;
}

namespace {

double density(const WavePacket& psi, double x, double t) { return std::norm(value(psi, x, t)); }

struct SupportWindow {
    double lo, hi;
};

SupportWindow support(const WavePacket& psi, double t) {
    if (const auto* g = std::get_if<GaussianPacket>(&psi)) {
        const double c = g->center + g->momentum / g->mass * t;
        return {c - 10 * g->spread(t), c + 10 * g->spread(t)};
    }
    if (std::holds_alternative<PlaneWave>(psi)) return {-10, 10};
    const auto& s = std::get<Superposition>(psi);
    double lo = 1e300, hi = -1e300;
    for (const auto& [c, g] : s.parts) {
        const double center = g.center + g.momentum / g.mass * t;
        lo = std::min(lo, center - 10 * g.spread(t));
        hi = std::max(hi, center + 10 * g.spread(t));
    }
    return {lo, hi};
}

}  // namespace

double sample_position(const WavePacket& psi, double t, Rng& rng) {
    if (const auto* g = std::get_if<GaussianPacket>(&psi))
        return g->center + g->momentum / g->mass * t + g->spread(t) * rng.normal();
    const auto& s = std::get<Superposition>(psi);
    // envelope: mixture of the component densities, inflated by the part count
    std::vector<double> weights;
    for (const auto& [c, g] : s.parts) weights.push_back(std::norm(c));
    const double inflate = static_cast<double>(s.parts.size());
    while (true) {
        const std::size_t pick = rng.pick(weights);
        const auto& g = s.parts[pick].second;
        const double x = g.center + g.momentum / g.mass * t + g.spread(t) * rng.normal();
        double envelope = 0.0;
        for (std::size_t k = 0; k < s.parts.size(); ++k) {
            const auto& gk = s.parts[k].second;
            envelope += weights[k] * std::norm(gk.value(x, t));
        }
        envelope *= inflate;
        const double target = density(psi, x, t);
        if (rng.uniform() * envelope <= target) return x;
    }
}

KsResult equivariance_test(const WavePacket& psi, int n_samples, double t0, double t1,
                           std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> finals(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const double q0 = sample_position(psi, t0, rng);
        finals[i] = integrate(psi, q0, t0, t1).trajectory.final_position();
    }
    std::sort(finals.begin(), finals.end());

    // numeric CDF of |psi(.,t1)|^2 on the sample points
    const auto window = support(psi, t1);
    const int grid = 20001;
    const double h = (window.hi - window.lo) / (grid - 1);
    std::vector<double> cdf(grid, 0.0);
    double acc = 0.0;
    double prev = density(psi, window.lo, t1);
    for (int k = 1; k < grid; ++k) {
        const double cur = density(psi, window.lo + k * h, t1);
        acc += 0.5 * (prev + cur) * h;
        cdf[k] = acc;
        prev = cur;
    }
    for (auto& c : cdf) c /= acc;

    const auto cdf_at = [&](double x) {
        if (x <= window.lo) return 0.0;
        if (x >= window.hi) return 1.0;
        const double pos = (x - window.lo) / h;
        const int k = static_cast<int>(pos);
        const double frac = pos - k;
        return cdf[k] * (1 - frac) + cdf[std::min(k + 1, grid - 1)] * frac;
    };

    double d = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const double f = cdf_at(finals[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n_samples));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n_samples - f));
    }
    return {d, ks_p_value(d, n_samples)};
}

double ks_p_value(double statistic, int n) {
    const double rootn = std::sqrt(static_cast<double>(n));
    const double t = (rootn + 0.12 + 0.11 / rootn) * statistic;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k)
        sum += (k % 2 == 1 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * t * t);
    return std::clamp(sum, 0.0, 1.0);
}

double DiracPacket::energy(double momentum, double mass) {
    return std::sqrt(momentum * momentum + mass * mass);
}

namespace {

/// Positive-energy spinor for H = p sigma_x + m sigma_z, normalized.
std::array<Cplx, 2> mode_spinor(double p, double m) {
    const double e = DiracPacket::energy(p, m);
    const double norm = std::sqrt(2.0 * e * (e + m));
    return {Cplx((m + e) / norm, 0.0), Cplx(p / norm, 0.0)};
}

std::array<Cplx, 2> spinor(const DiracPacket& psi, double x, double t) {
    std::array<Cplx, 2> out{Cplx(0, 0), Cplx(0, 0)};
    for (const auto& mode : psi.modes) {
        const double e = DiracPacket::energy(mode.momentum, psi.mass);
        const Cplx phase = std::exp(Cplx(0, mode.momentum * x - e * t));
        const auto u = mode_spinor(mode.momentum, psi.mass);
        out[0] += mode.amplitude * phase * u[0];
        out[1] += mode.amplitude * phase * u[1];
    }
    return out;
}

}  // namespace

DiracCurrent current(const DiracPacket& psi, double x, double t) {
    const auto s = spinor(psi, x, t);
    DiracCurrent j;
    j.j0 = std::norm(s[0]) + std::norm(s[1]);                  // psi^dagger psi
    j.j1 = 2.0 * std::real(std::conj(s[0]) * s[1]);            // psi^dagger sigma_x psi
    return j;
}

double bohm_dirac_velocity(const DiracPacket& psi, double x, double t) {
    const DiracCurrent j = current(psi, x, t);
    double scale = 0.0;
    for (const auto& mode : psi.modes) scale += std::norm(mode.amplitude);
    if (j.j0 <= 1e-14 * scale) throw ZeroDensity("vanishing density at the evaluation point");
    return j.j1 / j.j0;
}

Trajectory bohm_dirac_trajectory(const DiracPacket& psi, double x0, double t0, double t1,
                                 double step) {
    Trajectory traj;
    double x = x0;
    double t = t0;
    traj.samples.emplace_back(t, x);
    while (t1 - t > 1e-15) {
        const double h = std::min(step, t1 - t);
        const double k1 = bohm_dirac_velocity(psi, x, t);
        const double k2 = bohm_dirac_velocity(psi, x + 0.5 * h * k1, t + 0.5 * h);
        const double k3 = bohm_dirac_velocity(psi, x + 0.5 * h * k2, t + 0.5 * h);
        const double k4 = bohm_dirac_velocity(psi, x + h * k3, t + h);
        x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += h;
        traj.samples.emplace_back(t, x);
    }
    return traj;
}

namespace {

/// dX/dtau with tau the leaf offset: u = j / (n . j); n . u = 1 by
/// construction, so each world line crosses each leaf exactly once.
Event leaf_velocity(const DiracPacket& psi, const FlatFamily& foliation, const Event& point) {
    // the current in the packet's own coordinates
    const DiracCurrent j = current(psi, point.x, point.t);
    const Event j4{j.j0, j.j1, 0, 0};
    const double denom = spacetime::minkowski_dot(foliation.normal, j4);
    if (denom <= 0.0) throw ZeroDensity("current not future directed across the leaf");
    return {j4.t / denom, j4.x / denom, 0, 0};
}

}  // namespace

std::vector<Event> hbdm_step(const FlatFamily& foliation, const std::vector<DiracPacket>& packets,
                             const std::vector<Event>& crossings, std::size_t leaf_index,
                             int substeps) {
    if (leaf_index + 1 >= foliation.offsets.size())
        throw LeafSkipped("no next leaf to advance to");
    const double from = foliation.offsets[leaf_index];
    const double to = foliation.offsets[leaf_index + 1];
    if (packets.size() != crossings.size())
        throw DimMismatch("one crossing per packet required");

    std::vector<Event> next;
    for (std::size_t k = 0; k < packets.size(); ++k) {
        const double here = spacetime::minkowski_dot(foliation.normal, crossings[k]);
        if (std::abs(here - from) > 1e-9 * std::max(1.0, std::abs(from)))
            throw LeafSkipped("crossing does not sit on the current leaf");
        Event x = crossings[k];
        const double h = (to - from) / substeps;
        for (int step = 0; step < substeps; ++step) {
            const Event k1 = leaf_velocity(packets[k], foliation, x);
            const Event k2 = leaf_velocity(packets[k], foliation, x + 0.5 * h * k1);
            const Event k3 = leaf_velocity(packets[k], foliation, x + 0.5 * h * k2);
            const Event k4 = leaf_velocity(packets[k], foliation, x + h * k3);
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        next.push_back(x);
    }
    return next;
}

std::vector<std::vector<Event>> hbdm_worldlines(const FlatFamily& foliation,
                                                const std::vector<DiracPacket>& packets,
                                                std::vector<Event> crossings, int substeps) {
    std::vector<std::vector<Event>> lines(packets.size());
    for (std::size_t k = 0; k < packets.size(); ++k) lines[k].push_back(crossings[k]);
    for (std::size_t leaf = 0; leaf + 1 < foliation.offsets.size(); ++leaf) {
        crossings = hbdm_step(foliation, packets, crossings, leaf, substeps);
        for (std::size_t k = 0; k < packets.size(); ++k) lines[k].push_back(crossings[k]);
    }
    return lines;
}

Event struyve_frame(const std::vector<DiracPacket>& packets) {
    Event total{0, 0, 0, 0};
    for (const auto& packet : packets) {
        double weight = 0.0;
        Event p{0, 0, 0, 0};
        for (const auto& mode : packet.modes) {
            const double w = std::norm(mode.amplitude);
            weight += w;
            p.t += w * DiracPacket::energy(mode.momentum, packet.mass);
            p.x += w * mode.momentum;
        }
        total = total + (1.0 / weight) * p;
    }
    const double norm = std::sqrt(spacetime::minkowski_dot(total, total));
    return (1.0 / norm) * total;
}

}  // namespace minkqm::bohm
