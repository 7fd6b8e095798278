#pragma once

// Independent brute-force evaluator for probe-kick circuits. The probe pair
// of each procedure is modeled as a finite shift lattice (net momentum sum in
// units of the kick strength) and the whole state is a dense vector over
// (lattice tensor lattice ... tensor spin). Nothing here shares code with the
// library's label calculus.

#include <complex>
#include <cstddef>
#include <vector>

namespace oracle {

using Cplx = std::complex<double>;

struct KickSpec {
    std::size_t pair;      // which lattice factor
    int particle;          // 1 or 2
    char axis;             // 'x', 'y' or 'z'
    int direction;         // +1 to shift by -m (the physical sign convention)
};

class ProbeLattice {
  public:
    ProbeLattice(std::size_t n_pairs, int max_kicks, std::vector<Cplx> spin)
        : pairs_(n_pairs), radius_(max_kicks), width_(2 * max_kicks + 1), spin_dim_(spin.size()) {
        std::size_t dim = spin_dim_;
        for (std::size_t p = 0; p < pairs_; ++p) dim *= width_;
        amp_.assign(dim, Cplx(0, 0));
        // all lattices start at shift zero
        std::size_t base = 0;
        for (std::size_t p = 0; p < pairs_; ++p) base = base * width_ + radius_;
        for (std::size_t s = 0; s < spin_dim_; ++s) amp_[base * spin_dim_ + s] = spin[s];
    }

    // applies exp(-i F q sigma_axis^(particle)) on two spin-1/2 particles:
    // branch with eigenvalue m shifts pair's lattice index by -m
    void kick(std::size_t pair, int particle, char axis) {
        std::vector<Cplx> next(amp_.size(), Cplx(0, 0));
        for (std::size_t idx = 0; idx < amp_.size(); ++idx) {
            if (amp_[idx] == Cplx(0, 0)) continue;
            const std::size_t s = idx % spin_dim_;
            const std::size_t lattice = idx / spin_dim_;
            // decompose the spin index into the two qubits (particle 1 is the
            // most significant bit of a 4-dim spin space)
            for (int m : {+1, -1}) {
                // project qubit (particle-1) onto the axis eigenvector m
                for (std::size_t s2 = 0; s2 < spin_dim_; ++s2) {
                    const Cplx amp = projector_entry(axis, m, particle, s2, s);
                    if (amp == Cplx(0, 0)) continue;
                    const std::size_t shifted = shift_lattice(lattice, pair, -m);
                    if (shifted == kInvalid) continue;
                    next[shifted * spin_dim_ + s2] += amp * amp_[idx];
                }
            }
        }
        amp_ = std::move(next);
    }

    // probability that all the listed pairs sit at lattice shift zero
    double prob_all_zero(const std::vector<std::size_t>& pairs) const {
        double total = 0.0, zero = 0.0;
        for (std::size_t idx = 0; idx < amp_.size(); ++idx) {
            const double w = std::norm(amp_[idx]);
            if (w == 0.0) continue;
            total += w;
            std::size_t lattice = idx / spin_dim_;
            bool all_zero = true;
            for (std::size_t p = 0; p < pairs_; ++p) {
                const std::size_t pos = lattice % width_;
                lattice /= width_;
                const std::size_t pair_index = pairs_ - 1 - p;
                for (std::size_t q : pairs)
                    if (q == pair_index && pos != static_cast<std::size_t>(radius_))
                        all_zero = false;
            }
            if (all_zero) zero += w;
        }
        return zero / total;
    }

  private:
    static constexpr std::size_t kInvalid = static_cast<std::size_t>(-1);

    std::size_t shift_lattice(std::size_t lattice, std::size_t pair, int delta) const {
        // lattice index is big-endian over pairs
        std::vector<std::size_t> digits(pairs_);
        for (std::size_t p = pairs_; p-- > 0;) {
            digits[p] = lattice % width_;
            lattice /= width_;
        }
        const long long moved = static_cast<long long>(digits[pair]) + delta;
        if (moved < 0 || moved >= static_cast<long long>(width_)) return kInvalid;
        digits[pair] = static_cast<std::size_t>(moved);
        std::size_t out = 0;
        for (std::size_t p = 0; p < pairs_; ++p) out = out * width_ + digits[p];
        return out;
    }

    // <s2 | P_m^(particle) | s> for two qubits, built from explicit 2x2 blocks
    static Cplx projector_entry(char axis, int m, int particle, std::size_t s2, std::size_t s) {
        const auto single = [&](std::size_t r, std::size_t c) -> Cplx {
            const double half = 0.5;
            switch (axis) {
                case 'z':
                    if (r != c) return 0.0;
                    return (m > 0) == (r == 0) ? 1.0 : 0.0;
                case 'x':
                    return r == c ? half : (m > 0 ? half : -half);
                case 'y':
                    if (r == c) return half;
                    // (1 + m sigma_y)/2 off-diagonals: -i m/2 (upper), +i m/2 (lower)
                    return r < c ? Cplx(0, -0.5 * m) : Cplx(0, 0.5 * m);
            }
            return 0.0;
        };
        const std::size_t hi2 = s2 >> 1, lo2 = s2 & 1;
        const std::size_t hi = s >> 1, lo = s & 1;
        if (particle == 1) return (lo2 == lo) ? single(hi2, hi) : Cplx(0, 0);
        return (hi2 == hi) ? single(lo2, lo) : Cplx(0, 0);
    }

    std::size_t pairs_;
    int radius_;
    std::size_t width_;
    std::size_t spin_dim_;
    std::vector<Cplx> amp_;
};

}  // namespace oracle
