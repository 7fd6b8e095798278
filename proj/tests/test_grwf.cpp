#include <doctest.h>

#include <cmath>
#include <numeric>

#include "minkqm/bohm.hpp"  // ks_p_value
#include "minkqm/grwf.hpp"

using namespace minkqm;
using namespace minkqm::grwf;
using spacetime::Event;

namespace {

LatticeWave spike(int sites, int at) {
    LatticeWave w = LatticeWave::uniform(1, sites);
    w.amps.setZero();
    w.amps(at) = 1.0;
    return w;
}

}  // namespace

TEST_CASE("hit densities sum to one and respect symmetry") {
    const GrwParams p{};
    const LatticeWave uni = LatticeWave::uniform(1, 7);
    const auto density = hit_density(uni, 0, p);
    double sum = 0.0;
    for (double d : density) {
        CHECK(d == doctest::Approx(1.0 / 7).epsilon(1e-12));
        sum += d;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));

    // arbitrary normalized wave still sums to one
    Rng rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        LatticeWave w = LatticeWave::uniform(2, 5);
        for (Eigen::Index i = 0; i < w.dim(); ++i)
            w.amps(i) = Cplx(rng.normal(), rng.normal());
        w.amps /= w.amps.norm();
        for (int j = 0; j < 2; ++j) {
            const auto d = hit_density(w, j, p);
            CHECK(std::accumulate(d.begin(), d.end(), 0.0) ==
                  doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("hit on a narrow spike barely disturbs it") {
    const GrwParams p{0.5, 1.5};
    const LatticeWave w = spike(9, 4);
    const auto at_spike = hit(w, 0, 4, p);
    const auto far = hit(w, 0, 0, p);
    CHECK(at_spike.density > far.density);
    CHECK(std::norm(at_spike.wave.amps(4)) == doctest::Approx(1.0));
    // density is maximal at the spike
    const auto density = hit_density(w, 0, p);
    for (int c = 0; c < 9; ++c) CHECK(density[4] >= density[c]);
}

TEST_CASE("two-site superposition collapses to the hit site") {
    // sites far apart compared to alpha
    const GrwParams p{0.5, 0.6};
    LatticeWave w = LatticeWave::uniform(1, 8);
    w.amps.setZero();
    w.amps(0) = 1.0 / std::sqrt(2.0);
    w.amps(4) = 1.0 / std::sqrt(2.0);

    const auto res = hit(w, 0, 0, p);
    CHECK(std::norm(res.wave.amps(0)) == doctest::Approx(1.0).epsilon(1e-4));

    // closed-form Gaussian check: weight of each site under the profile
    const double g0 = 1.0, g4 = std::exp(-16.0 / (2 * 0.6 * 0.6));
    double z = 0.0;
    for (int k = 0; k < 8; ++k) {
        const double d = std::min(k, 8 - k) * 1.0;
        z += std::exp(-d * d / (2 * 0.6 * 0.6));
    }
    const double expect = 0.5 * (g0 + g4) / z;
    CHECK(res.density == doctest::Approx(expect).epsilon(1e-12));

    // each occupied region carries exactly half the hit probability once the
    // equidistant sites are split between them
    const auto density = hit_density(w, 0, p);
    const double near0 = density[7] + density[0] + density[1] + 0.5 * (density[2] + density[6]);
    const double near4 = density[3] + density[4] + density[5] + 0.5 * (density[2] + density[6]);
    CHECK(near0 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(near4 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("flash sampling follows the exponential law") {
    const GrwParams p{0.7, 1.5};
    Rng rng(62);
    const LatticeWave w = LatticeWave::uniform(1, 6);
    std::vector<double> u;
    double expected_count = 0.0;
    int total = 0;
    const double horizon = 50.0;
    const int runs = 300;
    for (int i = 0; i < runs; ++i) {
        const auto flashes = sample_flashes(w, horizon, p, rng);
        total += static_cast<int>(flashes.size());
        const auto batch = uniformized_gaps(flashes, 1, horizon, p.lambda);
        u.insert(u.end(), batch.begin(), batch.end());
    }
    expected_count = runs * p.lambda * horizon;
    CHECK(std::abs(total - expected_count) <= 3.0 * std::sqrt(expected_count));

    // window-conditioned probability transform of the gaps is uniform
    std::sort(u.begin(), u.end());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        d = std::max(d, std::abs(u[i] - static_cast<double>(i) / u.size()));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / u.size() - u[i]));
    }
    CHECK(bohm::ks_p_value(d, static_cast<int>(u.size())) > 0.01);

    // rate zero limit: no flashes
    const GrwParams frozen{1e-12, 1.5};
    CHECK(sample_flashes(w, 10.0, frozen, rng).empty());
}

TEST_CASE("joint flash distribution: basics") {
    const GrwParams p{};
    const LatticeWave w = LatticeWave::uniform(1, 5);
    const auto single = joint_flash_distribution(w, {{{0, 1.0}}}, p);
    for (double q : single.probs) CHECK(q == doctest::Approx(0.2).epsilon(1e-12));

    // product wave: marginal over particle 2 equals particle 1 alone
    LatticeWave two = LatticeWave::uniform(2, 4);
    const auto joint = joint_flash_distribution(two, {{{0, 1.0}, {1, 2.0}}}, p);
    double total = 0.0;
    for (double q : joint.probs) {
        CHECK(q >= 0.0);
        total += q;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    const auto alone = joint_flash_distribution(two, {{{0, 1.0}}}, p);
    for (int s0 = 0; s0 < 4; ++s0) {
        double marginal = 0.0;
        for (int s1 = 0; s1 < 4; ++s1) marginal += joint.prob_of({s0, s1});
        CHECK(marginal == doctest::Approx(alone.probs[s0]).epsilon(1e-12));
    }

    CHECK_THROWS_AS(joint_flash_distribution(LatticeWave::uniform(1, 9), {{{0, 1.0}}}, p),
                    TooLarge);
}

TEST_CASE("relative time translation invariance, exact and broken") {
    const GrwParams p{0.5, 1.0};
    // entangled two-particle wave
    LatticeWave w = LatticeWave::uniform(2, 4);
    w.amps.setZero();
    w.amps(0 + 4 * 0) = 1.0 / std::sqrt(2.0);   // both at site 0
    w.amps(2 + 4 * 2) = 1.0 / std::sqrt(2.0);   // both at site 2
    FlashSchedule base{{{0, 1.0}, {1, 1.5}, {0, 2.0}, {1, 2.5}}};
    FlashSchedule shifted{{{0, 1.0}, {1, 4.5}, {0, 2.0}, {1, 5.5}}};

    const auto d0 = joint_flash_distribution(w, base, p);
    const auto d1 = joint_flash_distribution(w, shifted, p);
    // map the site tuples: schedule order changes, so compare by particle
    // (base order: p0 p1 p0 p1 -> shifted order: p0 p0 p1 p1)
    double max_dev = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d)
                    max_dev = std::max(std::abs(d0.prob_of({a, b, c, d}) -
                                                d1.prob_of({a, c, b, d})),
                                       max_dev);
    CHECK(max_dev <= 1e-12);

    // coupling on: the same shift now changes the distribution
    const auto c0 = joint_flash_distribution(w, base, p, Coupling{1.0});
    const auto c1 = joint_flash_distribution(w, shifted, p, Coupling{1.0});
    double broken = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d)
                    broken = std::max(std::abs(c0.prob_of({a, b, c, d}) -
                                               c1.prob_of({a, c, b, d})),
                                      broken);
    CHECK(broken > 1e-3);
}

TEST_CASE("mass density") {
    const LatticeWave one = spike(5, 2);
    const auto m1 = mass_density(one, {3.0});
    CHECK(m1[2] == doctest::Approx(3.0));

    LatticeWave two = LatticeWave::uniform(2, 4);
    const auto m2 = mass_density(two, {1.0, 2.0});
    CHECK(std::accumulate(m2.begin(), m2.end(), 0.0) == doctest::Approx(3.0).epsilon(1e-12));

    // product wave: sum of the one-particle marginals
    LatticeWave prod = LatticeWave::uniform(2, 4);
    prod.amps.setZero();
    // particle 0 at site 1; particle 1 spread over sites 0 and 3
    prod.amps(1 + 4 * 0) = 1.0 / std::sqrt(2.0);
    prod.amps(1 + 4 * 3) = 1.0 / std::sqrt(2.0);
    const auto mp = mass_density(prod, {1.0, 1.0});
    CHECK(mp[1] == doctest::Approx(1.0));
    CHECK(mp[0] == doctest::Approx(0.5));
    CHECK(mp[3] == doctest::Approx(0.5));

    CHECK_THROWS_AS(mass_density(two, {1.0}), DimMismatch);
}

TEST_CASE("rgrwf density: future indicator") {
    const GrwParams p{0.5, 0.4};
    const RapidityPacket psi{0.0, 0.8};
    const Event seed{0, 0, 0, 0};
    CHECK(rgrwf_density(seed, {Event{0.0, 2.0, 0, 0}}, psi, p) == 0.0);   // spacelike
    CHECK(rgrwf_density(seed, {Event{-1.0, 0.0, 0, 0}}, psi, p) == 0.0);  // past
    CHECK(rgrwf_density(seed, {Event{1.0, 0.0, 0, 0}}, psi, p) > 0.0);
    // second flash spacelike to the first kills the history
    CHECK(rgrwf_density(seed, {Event{1, 0, 0, 0}, Event{1.5, 3.0, 0, 0}}, psi, p) == 0.0);
}

TEST_CASE("parameters must be positive") {
    const LatticeWave w = LatticeWave::uniform(1, 4);
    CHECK_THROWS_AS(hit_density(w, 0, GrwParams{-1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(hit_density(w, 0, GrwParams{1.0, 0.0}), ValidationError);
}

TEST_CASE("rgrwf packet transport hook") {
    const GrwParams p{0.5, 0.4};
    const RapidityPacket psi{0.0, 0.8};
    const Event seed{0, 0, 0, 0};
    const std::vector<Event> flashes{Event{1, 0, 0, 0}, Event{2.2, 0.4, 0, 0}};
    const double base = rgrwf_density(seed, flashes, psi, p);

    // explicit identity transport matches the default
    const auto identity = [](const RapidityPacket& pk, const Event&, const Event&) { return pk; };
    CHECK(rgrwf_density(seed, flashes, psi, p, identity) == base);

    // a transport that drags the packet changes multi-flash histories
    const auto drag = [](const RapidityPacket& pk, const Event&, const Event&) {
        return RapidityPacket{pk.mean_chi + 0.5, pk.sigma_chi};
    };
    CHECK(rgrwf_density(seed, flashes, psi, p, drag) != base);
}

TEST_CASE("rgrwf density: boost invariance") {
    const GrwParams p{0.5, 0.4};
    Rng rng(63);
    for (int trial = 0; trial < 100; ++trial) {
        const RapidityPacket psi{rng.uniform(-0.5, 0.5), rng.uniform(0.4, 1.2)};
        const Event seed{rng.uniform(-1, 1), rng.uniform(-1, 1), 0, 0};
        std::vector<Event> flashes;
        Event vertex = seed;
        const int n = 1 + static_cast<int>(rng.uniform() * 3);
        for (int k = 0; k < n; ++k) {
            const double tau = rng.uniform(0.3, 1.5);
            const double chi = rng.uniform(-1.0, 1.0);
            vertex = vertex + Event{tau * std::cosh(chi), tau * std::sinh(chi), 0, 0};
            flashes.push_back(vertex);
        }
        const double base = rgrwf_density(seed, flashes, psi, p);
        REQUIRE(base > 0.0);
        const double chi0 = rng.uniform(-1.0, 1.0);
        std::vector<Event> boosted;
        for (const auto& f : flashes) boosted.push_back(spacetime::boost(f, chi0));
        const double moved =
            rgrwf_density(spacetime::boost(seed, chi0), boosted, psi.boosted(chi0), p);
        CHECK(std::abs(moved - base) <= 1e-9 * std::abs(base));
    }
}

TEST_CASE("rgrwf density: single flash normalizes over the future") {
    const GrwParams p{0.5, 0.4};
    const RapidityPacket psi{0.0, 0.8};
    const Event seed{0, 0, 0, 0};
    // quadrature in hyperbolic polar coordinates, d^2x = tau dtau dchi; the
    // rapidity window widens at small tau where the localization profile
    // spreads like alpha/tau
    const int n_tau = 1500, n_chi = 1500;
    const double tau_max = 40.0;
    double integral = 0.0;
    for (int i = 0; i < n_tau; ++i) {
        const double tau = (i + 0.5) * tau_max / n_tau;
        const double sigma = std::sqrt(psi.sigma_chi * psi.sigma_chi +
                                       (p.alpha / tau) * (p.alpha / tau));
        const double chi_max = 8.0 * sigma + std::abs(psi.mean_chi);
        for (int j = 0; j < n_chi; ++j) {
            const double chi = -chi_max + (j + 0.5) * (2 * chi_max) / n_chi;
            const Event flash{tau * std::cosh(chi), tau * std::sinh(chi), 0, 0};
            integral += rgrwf_density(seed, {flash}, psi, p) * tau * (tau_max / n_tau) *
                        (2 * chi_max / n_chi);
        }
    }
    CHECK(std::abs(integral - 1.0) < 0.01);
}

TEST_CASE("joint flash distribution stays a distribution on random waves") {
    const GrwParams p{};
    Rng rng(64);
    for (int trial = 0; trial < 10; ++trial) {
        LatticeWave w = LatticeWave::uniform(2, 4);
        for (Eigen::Index i = 0; i < w.dim(); ++i) w.amps(i) = Cplx(rng.normal(), rng.normal());
        w.amps /= w.amps.norm();
        const auto d = joint_flash_distribution(w, {{{0, 1.0}, {1, 2.0}, {0, 3.0}}}, p);
        double total = 0.0;
        for (double q : d.probs) {
            CHECK(q >= -1e-15);
            total += q;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
}
