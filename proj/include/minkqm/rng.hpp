#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace minkqm {

/// Seeded RNG with portable derived distributions. The standard library's
/// normal/exponential distributions are implementation defined, which would
/// break byte-identical outputs across toolchains, so the few variates we
/// need are generated explicitly from the engine's uniform stream.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    /// Independent substream for run `id` (used by ensemble runners).
    static Rng for_run(std::uint64_t seed, std::uint64_t id) {
        return Rng(mix(seed ^ mix(id + 0x9e3779b97f4a7c15ull)));
    }

    /// Uniform on [0, 1).
    double uniform() {
        return std::ldexp(static_cast<double>(engine_() >> 11), -53);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Exponential waiting time with the given rate.
    double exponential(double rate) {
        double u = 0.0;
        do { u = uniform(); } while (u <= 0.0);
        return -std::log(u) / rate;
    }

    /// Index sampled from (possibly unnormalized) non-negative weights.
    std::size_t pick(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double r = uniform() * total;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            r -= weights[i];
            if (r < 0.0) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    std::uint64_t raw() { return engine_(); }

  private:
    static std::uint64_t mix(std::uint64_t v) {
        v ^= v >> 30;
        v *= 0xbf58476d1ce4e5b9ull;
        v ^= v >> 27;
        v *= 0x94d049bb133111ebull;
        v ^= v >> 31;
        return v;
    }

    std::mt19937_64 engine_;
};

}  // namespace minkqm
