#include <doctest.h>

#include <cmath>
#include <set>

#include "minkqm/scenarios.hpp"
#include "support/oracles.hpp"

using namespace minkqm;
using namespace minkqm::scenarios;
using hilbert::basis_ket;
using hilbert::Cplx;
using hilbert::Vec;
using probe::Axis;
using spacetime::Event;
using spacetime::EventOrder;
using spacetime::FlatFamily;
using spacetime::Hyperplane;

namespace {

std::vector<oracle::Cplx> spin_of(const hilbert::Ket& k) {
    std::vector<oracle::Cplx> v(k.amps.size());
    for (Eigen::Index i = 0; i < k.amps.size(); ++i) v[i] = k.amps(i);
    return v;
}

}  // namespace

TEST_CASE("eprb correlation and chsh") {
    const std::array<double, 3> z{0, 0, 1};
    const std::array<double, 3> x{1, 0, 0};
    CHECK(eprb_correlation(z, z) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(eprb_correlation(z, x) == doctest::Approx(0.0));

    // E(a,b) = -cos(angle) for coplanar magnets
    Rng rng(51);
    for (int i = 0; i < 100; ++i) {
        const double ta = rng.uniform(0, 2 * M_PI), tb = rng.uniform(0, 2 * M_PI);
        const std::array<double, 3> a{std::sin(ta), 0, std::cos(ta)};
        const std::array<double, 3> b{std::sin(tb), 0, std::cos(tb)};
        CHECK(eprb_correlation(a, b) == doctest::Approx(-std::cos(ta - tb)).epsilon(1e-12));
    }

    // optimal angles: a = 0, a' = 90, b = 45, b' = 135 degrees
    const auto dir = [](double deg) -> std::array<double, 3> {
        const double r = deg * M_PI / 180.0;
        return {std::sin(r), 0, std::cos(r)};
    };
    CHECK(chsh(dir(0), dir(90), dir(45), dir(135)) ==
          doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("eprb run: aligned magnets never agree") {
    Rng rng(52);
    for (int i = 0; i < 2000; ++i) {
        const auto sample = sample_eprb({0, 0, 1}, {0, 0, 1}, rng);
        CHECK(sample.outcome_a == -sample.outcome_b);
    }
    const Scenario s = eprb_scenario({0, 0, 1}, {0, 0, 1});
    Transcript t = run(s, 7);
    CHECK(t.value_of("sgm1").value() == -t.value_of("sgm2").value());
}

TEST_CASE("scenario validation rejects non-commuting spacelike ops") {
    Scenario s = eprb_scenario({0, 0, 1}, {0, 0, 1});
    // make the magnets measure non-commuting components of the SAME particle
    s.ops[1].action = SpinMeasureAction{
        hilbert::embed(hilbert::pauli({1, 0, 0}), 0, {2, 2}), "sigma_x(1)"};
    try {
        validate(s);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("sgm1") != std::string::npos);
        CHECK(msg.find("sgm2") != std::string::npos);
    }
}

TEST_CASE("single-op scenario reduces to plain collapse") {
    Scenario s;
    s.initial = QState::from_ket(hilbert::singlet());
    const auto sz2 = hilbert::embed({{2}, hilbert::sigma_z()}, 1, {2, 2});
    s.ops.push_back({"m", Event{1, 1, 0, 0}, SpinMeasureAction{sz2, "sigma_z(2)"}});
    s.pinned["m"] = -1.0;
    Transcript t = run(s, 0);
    CHECK(hilbert::fidelity(t.final_state.single_spin(), basis_ket({2, 2}, 1).amps) == 1.0);
    CHECK(t.weight == doctest::Approx(0.5));
}

TEST_CASE("ties on one leaf: commuting ops run in input order, non-commuting rejected") {
    Scenario s;
    s.initial = QState::from_ket(hilbert::singlet());
    const auto sz1 = hilbert::embed({{2}, hilbert::sigma_z()}, 0, {2, 2});
    const auto sx1 = hilbert::embed({{2}, hilbert::sigma_x()}, 0, {2, 2});
    s.ops.push_back({"a", Event{1, -1, 0, 0}, SpinMeasureAction{sz1, "sigma_z(1)"}});
    s.ops.push_back({"b", Event{1, -1.1, 0, 0}, SpinMeasureAction{sx1, "sigma_x(1)"}});
    // same leaf (t = 1), space-like separated points
    CHECK_THROWS_AS(run(s, 0), ValidationError);

    s.ops[1].action = SpinMeasureAction{sz1, "sigma_z(1)"};
    CHECK_NOTHROW(run(s, 0));
}

TEST_CASE("aa simultaneous from the singlet: sums exactly zero, state untouched") {
    const auto res = aa_simultaneous(hilbert::singlet(), 3);
    CHECK(res.sums[0] == 0.0);
    CHECK(res.sums[1] == 0.0);
    CHECK(res.sums[2] == 0.0);
    CHECK(res.fidelity_to_initial >= 1.0 - 1e-12);
}

TEST_CASE("aa simultaneous on |uu>, z axis only") {
    Scenario s;
    s.initial = QState::from_ket(basis_ket({2, 2}, 0));
    s.probes.add("z", Axis::z);
    s.ops.push_back({"k2", Event{0, 1, 0, 0}, KickAction{"z", 2, Axis::z, 1.0}});
    s.ops.push_back({"k1", Event{0, -1, 0, 0}, KickAction{"z", 1, Axis::z, 1.0}});
    s.ops.push_back({"p2", Event{1, 1, 0, 0}, PiMeasureAction{"z", 2}});
    s.ops.push_back({"p1", Event{2, -1, 0, 0}, PiMeasureAction{"z", 1}});
    Transcript t = run(s, 5);
    CHECK(t.sum_of("p1").value() == -2.0);  // sigma_tot_z = -sum/F = +2
    CHECK(hilbert::fidelity(t.final_state.single_spin(), basis_ket({2, 2}, 0).amps) == 1.0);
}

TEST_CASE("aa verification probability: singlet certain, |ud> at one half") {
    CHECK(aa_verification_probability(hilbert::singlet()) == doctest::Approx(1.0).epsilon(1e-12));
    const double p_ud = aa_verification_probability(basis_ket({2, 2}, 1));
    CHECK(p_ud < 1.0);

    // independent dense-lattice enumeration of the same circuit
    oracle::ProbeLattice lattice(3, 2, spin_of(basis_ket({2, 2}, 1)));
    const char axes[3] = {'x', 'y', 'z'};
    for (std::size_t axis = 0; axis < 3; ++axis) {
        lattice.kick(axis, 2, axes[axis]);
        lattice.kick(axis, 1, axes[axis]);
    }
    const double oracle_p = lattice.prob_all_zero({0, 1, 2});
    CHECK(std::abs(p_ud - oracle_p) <= 1e-12);
    CHECK(oracle_p == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("aa all-zero frequency matches the exact probability") {
    const int n = 2000;
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
        Rng run_rng = Rng::for_run(53, static_cast<std::uint64_t>(i));
        const auto res = aa_simultaneous(basis_ket({2, 2}, 1), run_rng.raw());
        const bool all_zero = std::abs(res.sums[0]) < 1e-9 && std::abs(res.sums[1]) < 1e-9 &&
                              std::abs(res.sums[2]) < 1e-9;
        if (all_zero) ++zeros;
    }
    const double frac = static_cast<double>(zeros) / n;
    CHECK(std::abs(frac - 0.5) < 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("aa time displaced reproduces the two-branch intermediate state") {
    const auto res = aa_time_displaced(9);
    REQUIRE(res.intermediate_branches.size() == 2);
    CHECK(res.intermediate_branches[0].first == -1.0);  // shift -F with |du>
    CHECK(res.intermediate_branches[1].first == +1.0);  // shift +F with |ud>
    CHECK(res.intermediate_branches[0].second == 0.5);  // exactly half
    CHECK(res.intermediate_branches[1].second == 0.5);
    CHECK(res.pi1 == -res.pi2);
    CHECK(res.sum == 0.0);
    CHECK(res.fidelity_to_singlet == 1.0);

    // spin parts attached to the labels match the displaced-procedure state
    for (const auto& term : res.intermediate.terms) {
        const auto& c = std::get<probe::Collapsed>(term.labels.at("z"));
        Vec expected = basis_ket({2, 2}, c.shift > 0 ? 1 : 2).amps;
        CHECK(hilbert::fidelity(term.spin, expected) == doctest::Approx(1.0));
    }

    // degenerate limit: vanishing coupling strength never disturbs the state
    const auto weak = aa_time_displaced(9, 1e-9);
    CHECK(weak.fidelity_to_singlet == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(weak.sum == 0.0);
}

TEST_CASE("aa under the distinguished foliation, z axis") {
    const auto res = aa_under_foliation(Axis::z, 1, -1.0);
    CHECK(res.sum == 0.0);
    CHECK(res.fidelity_to_up_down == 1.0);
    CHECK(res.p_sz1_plus == 1.0);
}

TEST_CASE("aa under the distinguished foliation, x axis") {
    const auto res = aa_under_foliation(Axis::x, 1, -1.0);
    CHECK(res.sum == 0.0);         // sigma_tot_x readout still vanishes
    CHECK(res.p_sz1_plus == 1.0);  // magnet 1 is certain
    CHECK(res.fidelity_to_up_down == 1.0);

    // conditioning the other way lands in |du> by symmetry
    const auto flipped = aa_under_foliation(Axis::x, 1, +1.0);
    CHECK(flipped.sum == 0.0);
    CHECK(flipped.fidelity_to_up_down == 1.0);
}

TEST_CASE("monitoring in two frames at once disturbs the singlet") {
    const auto interleaved = monitoring_conflict(MonitorLayout::interleaved);
    CHECK(interleaved.p_all_zero < 1.0);
    CHECK(interleaved.p_all_zero == doctest::Approx(0.5).epsilon(1e-12));

    // independent enumeration: primed pair is lattice 0, unprimed x,y,z are 1..3
    oracle::ProbeLattice lattice(4, 2, spin_of(hilbert::singlet()));
    lattice.kick(0, 2, 'z');
    const char axes[3] = {'x', 'y', 'z'};
    for (std::size_t axis = 0; axis < 3; ++axis) {
        lattice.kick(axis + 1, 2, axes[axis]);
        lattice.kick(axis + 1, 1, axes[axis]);
    }
    CHECK(std::abs(interleaved.p_all_zero - lattice.prob_all_zero({1, 2, 3})) <= 1e-12);

    CHECK(monitoring_conflict(MonitorLayout::no_primed).p_all_zero == 1.0);
    CHECK(monitoring_conflict(MonitorLayout::primed_first).p_all_zero == 1.0);
}

TEST_CASE("hellwig-kraus state at a point") {
    Scenario s = eprb_scenario({0, 0, 1}, {0, 0, 1});
    s.scheme = HellwigKraus{};
    s.pinned["sgm1"] = +1.0;
    s.pinned["sgm2"] = -1.0;
    Transcript t = run(s, 0);

    // deep past: initial state
    const QState past = hk_state_at_point(s, t, Event{-10, 0, 0, 0});
    CHECK(hilbert::fidelity(past.single_spin(), hilbert::singlet().amps) == 1.0);

    // future of the particle-2 measurement only
    const QState wing = hk_state_at_point(s, t, Event{1.2, 1.0, 0, 0});
    CHECK(hilbert::fidelity(wing.single_spin(), basis_ket({2, 2}, 1).amps) == 1.0);

    // future of both
    const QState both = hk_state_at_point(s, t, Event{22, 0, 0, 0});
    CHECK(hilbert::fidelity(both.single_spin(), basis_ket({2, 2}, 1).amps) == 1.0);
}

TEST_CASE("hellwig-kraus refutation") {
    const auto res = hk_refutation();
    CHECK(hilbert::fidelity(res.hk_wing_state.amps, basis_ket({2, 2}, 1).amps) == 1.0);
    CHECK(res.p_verify_schemes == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.mass > 0.2);

    oracle::ProbeLattice lattice(3, 2, spin_of(res.hk_wing_state));
    const char axes[3] = {'x', 'y', 'z'};
    for (std::size_t axis = 0; axis < 3; ++axis) {
        lattice.kick(axis, 2, axes[axis]);
        lattice.kick(axis, 1, axes[axis]);
    }
    CHECK(std::abs((1.0 - lattice.prob_all_zero({0, 1, 2})) - res.mass) <= 1e-12);
}

TEST_CASE("state on surfaces: the reduced description is surface dependent") {
    const auto res = reduced_density_demo();
    CHECK(res.rho_sigma_red(0, 0) == Cplx(0.5, 0));
    CHECK(res.rho_sigma_red(1, 1) == Cplx(0.5, 0));
    CHECK(res.rho_sigma_red(0, 1) == Cplx(0, 0));
    CHECK(res.rho_xi_red(0, 0) == Cplx(1, 0));
    CHECK(res.rho_xi_red(1, 1) == Cplx(0, 0));

    // generic surface-functional route agrees within float dust
    Scenario s = eprb_scenario({0, 0, 1}, {0, 0, 1});
    s.scheme = SolutionI{{}};
    s.ops.erase(s.ops.begin());  // keep only the particle-2 magnet at (1, +1)
    s.pinned["sgm2"] = -1.0;
    Transcript t = run(s, 0);
    const Hyperplane sigma{Event{1, 0, 0, 0}, 0.5};
    const Hyperplane xi{Event{1, 0, 0, 0}, 1.5};
    const auto before = state_on_surface(t, s, sigma);
    const auto after = state_on_surface(t, s, xi);
    const auto red_before =
        hilbert::partial_trace({{2, 2}, hilbert::outer(before.state.single_spin())}, 0);
    const auto red_after =
        hilbert::partial_trace({{2, 2}, hilbert::outer(after.state.single_spin())}, 0);
    CHECK((red_before.mat - res.rho_sigma_red).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((red_after.mat - res.rho_xi_red).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("surface independence holds while no collapse event intervenes") {
    Scenario s = eprb_scenario({0, 0, 1}, {0, 0, 1});
    s.scheme = SolutionI{{}};
    s.ops.erase(s.ops.begin());  // single measurement at (1, +1)
    s.pinned["sgm2"] = -1.0;
    Transcript t = run(s, 0);

    // two tilted surfaces, both below the measurement event
    const Event n1 = spacetime::boost(Event{1, 0, 0, 0}, 0.3);
    const Event n2 = spacetime::boost(Event{1, 0, 0, 0}, -0.4);
    const Hyperplane s1{n1, spacetime::minkowski_dot(n1, Event{0.2, 1, 0, 0})};
    const Hyperplane s2{n2, spacetime::minkowski_dot(n2, Event{0.1, 1, 0, 0})};
    REQUIRE_FALSE(s1.strictly_past(Event{1, 1, 0, 0}));
    REQUIRE_FALSE(s2.strictly_past(Event{1, 1, 0, 0}));
    const auto a = state_on_surface(t, s, s1);
    const auto b = state_on_surface(t, s, s2);
    const auto ra = hilbert::partial_trace({{2, 2}, hilbert::outer(a.state.single_spin())}, 0);
    const auto rb = hilbert::partial_trace({{2, 2}, hilbert::outer(b.state.single_spin())}, 0);
    CHECK((ra.mat - rb.mat).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("surface crossing an event exactly reports and excludes the op") {
    Scenario s = eprb_scenario({0, 0, 1}, {0, 0, 1});
    s.scheme = SolutionI{{}};
    s.pinned["sgm1"] = +1.0;
    s.pinned["sgm2"] = -1.0;
    Transcript t = run(s, 0);
    const Hyperplane through{Event{1, 0, 0, 0}, 1.0};  // contains both magnet events
    const auto res = state_on_surface(t, s, through);
    CHECK(res.excluded_on_surface.size() == 2);
    CHECK(hilbert::fidelity(res.state.single_spin(), hilbert::singlet().amps) == 1.0);
}

TEST_CASE("one-particle three-region histories differ between frames") {
    const auto res = three_region_demo();
    Vec mid_k = Vec::Zero(3);
    mid_k(1) = 1 / std::sqrt(2.0);
    mid_k(2) = 1 / std::sqrt(2.0);
    Vec mid_kp = Vec::Zero(3);
    mid_kp(0) = 1 / std::sqrt(2.0);
    mid_kp(2) = 1 / std::sqrt(2.0);
    CHECK(hilbert::fidelity(res.k_frame_mid.amps, mid_k) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hilbert::fidelity(res.k_prime_frame_mid.amps, mid_kp) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // neither history contains the other's intermediate state
    CHECK(hilbert::fidelity(res.k_frame_mid.amps, mid_kp) < 0.9);
}

TEST_CASE("order independence across admissible sweep orders") {
    Rng rng(54);
    int tested = 0;
    for (int trial = 0; trial < 50; ++trial) {
        Scenario s;
        s.initial = QState::from_ket(hilbert::singlet());
        s.probes.add("x", Axis::x);
        s.probes.add("z", Axis::z);
        const int n_ops = 3 + static_cast<int>(rng.uniform() * 3);  // 3..5
        const double strengths[4] = {0.5, 1.0, 1.5, 2.0};
        for (int k = 0; k < n_ops; ++k) {
            const std::string id = "op" + std::to_string(k);
            // scatter events; alternate wings to create spacelike pairs
            const Event e{rng.uniform(0, 1), (k % 2 == 0 ? -4.0 : 4.0) + rng.uniform(-1, 1), 0, 0};
            const int choice = static_cast<int>(rng.uniform() * 3);
            const int particle = k % 2 == 0 ? 1 : 2;
            if (choice == 0) {
                s.ops.push_back({id, e,
                                 KickAction{particle == 1 ? "x" : "z", particle,
                                            particle == 1 ? Axis::x : Axis::z,
                                            strengths[static_cast<int>(rng.uniform() * 4)]}});
            } else if (choice == 1) {
                const auto obs = hilbert::embed(
                    {{2}, particle == 1 ? hilbert::sigma_x() : hilbert::sigma_z()},
                    static_cast<std::size_t>(particle - 1), {2, 2});
                s.ops.push_back({id, e, SpinMeasureAction{obs, "sigma(" + id + ")"}});
            } else {
                const auto gen = hilbert::embed(
                    {{2}, particle == 1 ? hilbert::sigma_x() : hilbert::sigma_z()},
                    static_cast<std::size_t>(particle - 1), {2, 2});
                s.ops.push_back({id, e, SpinUnitaryAction{hilbert::exp_hermitian(gen, 0.7)}});
            }
        }
        try {
            validate(s);
        } catch (const ValidationError&) {
            continue;  // generator occasionally builds a rejected layout
        }
        const auto orders = admissible_orders(s, 200);
        if (orders.size() < 2) continue;
        ++tested;
        const auto reference = enumerate_distribution(s, orders.front());
        for (std::size_t o = 1; o < orders.size(); ++o) {
            const auto other = enumerate_distribution(s, orders[o]);
            for (const auto& [key, p] : reference) {
                auto it = other.find(key);
                CHECK(std::abs((it == other.end() ? 0.0 : it->second) - p) <= 1e-12);
            }
            for (const auto& [key, p] : other)
                if (reference.find(key) == reference.end()) CHECK(p <= 1e-12);
        }
    }
    CHECK(tested >= 20);
}

TEST_CASE("scenario files: schema, unknown fields, pinning") {
    const std::string text = R"({
      "schema": 1,
      "initial": "singlet",
      "ops": [
        {"id": "sgm1", "event": [1, -1, 0, 0], "action": "spin_measure",
         "direction": [0, 0, 1], "subsystem": 1},
        {"id": "sgm2", "event": [1,  1, 0, 0], "action": "spin_measure",
         "direction": [0, 0, 1], "subsystem": 2}
      ],
      "scheme": {"kind": "solution2_flat"},
      "pinned": {"sgm1": 1.0, "sgm2": -1.0}
    })";
    const Scenario s = load_scenario(text);
    Transcript t = run(s, 0);
    CHECK(t.value_of("sgm1").value() == 1.0);

    CHECK_THROWS_AS(load_scenario(R"({"schema": 2, "ops": []})"), ValidationError);
    CHECK_THROWS_AS(load_scenario(R"({"schema": 1, "ops": [], "extra": 1})"), ValidationError);
    CHECK_THROWS_AS(load_scenario("not json"), ValidationError);
}

TEST_CASE("backward-cone and surface schemes agree where no frame issue arises") {
    // single measurement: the deep-future backward-cone state equals the
    // scheme-run final state
    Scenario single;
    single.initial = QState::from_ket(hilbert::singlet());
    const auto sz2 = hilbert::embed({{2}, hilbert::sigma_z()}, 1, {2, 2});
    single.ops.push_back({"m", Event{1, 1, 0, 0}, SpinMeasureAction{sz2, "sigma_z(2)"}});
    single.pinned["m"] = -1.0;
    Transcript t1 = run(single, 0);
    const QState hk1 = hk_state_at_point(single, t1, Event{50, 0, 0, 0});
    CHECK(hilbert::fidelity(hk1.single_spin(), t1.final_state.single_spin()) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // fully timelike-ordered measurements: same agreement
    Scenario chain;
    chain.initial = QState::from_ket(hilbert::singlet());
    const auto sx1 = hilbert::embed({{2}, hilbert::sigma_x()}, 0, {2, 2});
    chain.ops.push_back({"m1", Event{0, 0, 0, 0}, SpinMeasureAction{sz2, "sigma_z(2)"}});
    chain.ops.push_back({"m2", Event{2, 0.5, 0, 0}, SpinMeasureAction{sx1, "sigma_x(1)"}});
    chain.pinned["m1"] = -1.0;
    chain.pinned["m2"] = +1.0;
    Transcript t2 = run(chain, 0);
    const QState hk2 = hk_state_at_point(chain, t2, Event{50, 0, 0, 0});
    CHECK(hilbert::fidelity(hk2.single_spin(), t2.final_state.single_spin()) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // the transcript keeps a state per crossed leaf
    REQUIRE(t2.states.size() == 2);
    CHECK(hilbert::fidelity(t2.states[0].single_spin(), basis_ket({2, 2}, 1).amps) == 1.0);
}

TEST_CASE("transcript weight multiplies the recorded probabilities") {
    Scenario s = eprb_scenario({1, 0, 0}, {0, 0, 1});
    Transcript t = run(s, 12);
    double product = 1.0;
    for (const auto& o : t.outcomes) product *= o.probability;
    CHECK(t.weight == doctest::Approx(product));
}
