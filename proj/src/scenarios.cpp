#include "minkqm/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

namespace minkqm::scenarios {

using hilbert::Ket;
using hilbert::Mat;
using measurement::Term;
using probe::ProbeLabel;
using spacetime::CausalClass;
using spacetime::EventOrder;
using spacetime::FlatFamily;

std::optional<double> Transcript::value_of(const std::string& op_id) const {
    for (const auto& e : outcomes)
        if (e.op_id == op_id) return e.eigenvalue;
    return std::nullopt;
}

std::optional<double> Transcript::sum_of(const std::string& op_id) const {
    for (const auto& e : outcomes)
        if (e.op_id == op_id) return e.pair_sum;
    return std::nullopt;
}

namespace {

/// Spin-space factor of an action's operator (identity when none).
std::optional<Mat> spin_factor(const Scenario& s, const Action& a) {
    if (const auto* k = std::get_if<KickAction>(&a))
        return hilbert::embed(measurement::axis_operator(k->axis),
                              static_cast<std::size_t>(k->particle - 1), s.initial.dims)
            .mat;
    if (const auto* u = std::get_if<SpinUnitaryAction>(&a)) return u->op.mat;
    if (const auto* m = std::get_if<SpinMeasureAction>(&a)) return m->observable.mat;
    return std::nullopt;  // pi readout: trivial on the spin space
}

bool spin_parts_commute(const Scenario& s, const Action& a, const Action& b) {
    const auto ma = spin_factor(s, a);
    const auto mb = spin_factor(s, b);
    if (!ma || !mb) return true;
    const Mat c = (*ma) * (*mb) - (*mb) * (*ma);
    return c.cwiseAbs().maxCoeff() <= 1e-10;
}

/// Probe-space factors: kicks act through q of one particle, readouts through
/// pi of one particle; [q_j, pi_j] = i is the only non-commuting pair.
bool probe_parts_commute(const Action& a, const Action& b) {
    const auto probe_ref = [](const Action& act) -> std::optional<std::pair<std::string, int>> {
        if (const auto* k = std::get_if<KickAction>(&act)) return {{k->pair_id, k->particle}};
        if (const auto* p = std::get_if<PiMeasureAction>(&act)) return {{p->pair_id, p->particle}};
        return std::nullopt;
    };
    const auto ra = probe_ref(a);
    const auto rb = probe_ref(b);
    if (!ra || !rb) return true;
    if (ra->first != rb->first || ra->second != rb->second) return true;
    const bool a_kick = std::holds_alternative<KickAction>(a);
    const bool b_kick = std::holds_alternative<KickAction>(b);
    return a_kick == b_kick;  // q with q or pi with pi on the same particle
}

}  // namespace

bool actions_commute(const Scenario& s, const TimelineOp& a, const TimelineOp& b) {
    return spin_parts_commute(s, a.action, b.action) && probe_parts_commute(a.action, b.action);
}

void validate(const Scenario& s) {
    for (const auto& op : s.ops) {
        if (const auto* k = std::get_if<KickAction>(&op.action)) {
            if (k->strength <= 0.0)
                throw ValidationError("kick '" + op.id + "' must have positive strength");
            if (!s.probes.has(k->pair_id))
                throw ValidationError("kick '" + op.id + "' references unknown pair '" +
                                      k->pair_id + "'");
        }
        if (const auto* p = std::get_if<PiMeasureAction>(&op.action)) {
            if (!s.probes.has(p->pair_id))
                throw ValidationError("readout '" + op.id + "' references unknown pair '" +
                                      p->pair_id + "'");
        }
    }
    for (std::size_t i = 0; i < s.ops.size(); ++i) {
        for (std::size_t j = i + 1; j < s.ops.size(); ++j) {
            if (spacetime::classify(s.ops[i].event, s.ops[j].event) != CausalClass::spacelike)
                continue;
            if (!actions_commute(s, s.ops[i], s.ops[j]))
                throw ValidationError("non-commuting operators at space-like separation: '" +
                                      s.ops[i].id + "' and '" + s.ops[j].id + "'");
        }
    }
    if (const auto* sol2 = std::get_if<SolutionII>(&s.scheme)) {
        if (const auto* reg = std::get_if<EventOrder>(&sol2->foliation)) spacetime::validate(*reg);
    }
}

std::vector<std::size_t> sweep(const Scenario& s) {
    std::vector<Event> events;
    for (const auto& op : s.ops) events.push_back(op.event);

    const Foliation* foliation = nullptr;
    const FlatFamily lab{};
    Foliation lab_f = lab;
    if (const auto* sol2 = std::get_if<SolutionII>(&s.scheme)) foliation = &sol2->foliation;
    else foliation = &lab_f;  // surface functional and backward-cone schemes run in lab order

    const auto result = spacetime::sweep_order(*foliation, events);
    // same-leaf ties keep input order but must commute
    for (std::size_t k = 1; k < result.order.size(); ++k) {
        if (!result.tied_with_previous[k]) continue;
        const auto& a = s.ops[result.order[k - 1]];
        const auto& b = s.ops[result.order[k]];
        if (!actions_commute(s, a, b))
            throw ValidationError("non-commuting operators tied on one leaf: '" + a.id +
                                  "' and '" + b.id + "'");
    }
    return result.order;
}

namespace {

struct AppliedOp {
    OutcomeRecord entry;
    QState after;
};

AppliedOp apply_op(const Scenario& s, const QState& state, const TimelineOp& op, Rng& rng,
                   const std::map<std::string, double>& pinned) {
    AppliedOp out;
    out.entry.op_id = op.id;
    out.entry.event = op.event;

    if (const auto* k = std::get_if<KickAction>(&op.action)) {
        out.entry.observable = "kick";
        out.after = measurement::kick(state, k->pair_id, k->particle, k->axis, k->strength);
        return out;
    }
    if (const auto* u = std::get_if<SpinUnitaryAction>(&op.action)) {
        out.entry.observable = "unitary";
        out.after = measurement::apply_unitary(state, u->op);
        return out;
    }
    if (const auto* m = std::get_if<SpinMeasureAction>(&op.action)) {
        out.entry.observable = m->observable_name;
        const Distribution d = measurement::born(state, m->observable);
        double outcome;
        if (auto it = pinned.find(op.id); it != pinned.end()) {
            outcome = it->second;
            if (d.prob_of(outcome) <= 0.0)
                throw ZeroProbabilityConditioning("pinned outcome for '" + op.id +
                                                  "' has zero probability");
        } else {
            std::vector<double> weights;
            for (const auto& [eig, p] : d.p) weights.push_back(p);
            outcome = d.p[rng.pick(weights)].first;
        }
        out.entry.eigenvalue = outcome;
        out.entry.probability = d.prob_of(outcome);
        out.after = measurement::collapse(state, m->observable, outcome);
        return out;
    }
    const auto& pi = std::get<PiMeasureAction>(op.action);
    out.entry.observable = "pi" + std::to_string(pi.particle) + "(" + pi.pair_id + ")";
    std::optional<double> pin;
    if (auto it = pinned.find(op.id); it != pinned.end()) pin = it->second;
    auto res = measurement::measure_pi(state, pi.pair_id, pi.particle, rng, pin);
    out.entry.eigenvalue = res.value;
    out.entry.probability = res.probability;
    if (pi.particle == 1) out.entry.pair_sum = res.pair_sum;
    out.after = std::move(res.after);
    return out;
}

}  // namespace

Transcript run(const Scenario& s, Rng& rng) {
    validate(s);
    Transcript t;
    t.order = sweep(s);
    QState state = s.initial;
    for (std::size_t idx : t.order) {
        AppliedOp applied = apply_op(s, state, s.ops[idx], rng, s.pinned);
        t.weight *= applied.entry.probability;
        t.outcomes.push_back(std::move(applied.entry));
        state = std::move(applied.after);
        t.states.push_back(state);
    }
    t.final_state = std::move(state);
    return t;
}

Transcript run(const Scenario& s, std::uint64_t seed) {
    Rng rng(seed);
    return run(s, rng);
}

SurfaceState state_on_surface(const Transcript& t, const Scenario& s, const Hyperplane& sigma) {
    SurfaceState out;
    QState state = s.initial;
    Rng dummy(0);
    std::map<std::string, double> pins = s.pinned;
    for (const auto& e : t.outcomes) {
        if (e.observable == "kick" || e.observable == "unitary") continue;
        if (e.pair_sum) pins[e.op_id] = *e.pair_sum;      // pi1: pin the pair sum
        else pins[e.op_id] = e.eigenvalue;                      // spin outcome or pi2 value
    }
    double scale = 1.0;
    for (const auto& op : s.ops)
        scale = std::max(scale, spacetime::coordinate_scale(op.event, op.event));
    for (std::size_t idx : t.order) {
        const auto& op = s.ops[idx];
        const double h = sigma.height(op.event);
        if (std::abs(h) <= 1e-12 * scale) {
            out.excluded_on_surface.push_back(op.id);
            continue;
        }
        if (h > 0.0) continue;  // strictly future of the surface
        state = apply_op(s, state, op, dummy, pins).after;
    }
    out.state = std::move(state);
    return out;
}

QState hk_state_at_point(const Scenario& s, const Transcript& t, const Event& x) {
    struct Reduction {
        Event event;
        const SpinMeasureAction* action;
        double outcome;
    };
    std::vector<Reduction> reductions;
    for (std::size_t idx : t.order) {
        const auto& op = s.ops[idx];
        const auto* m = std::get_if<SpinMeasureAction>(&op.action);
        if (!m) continue;
        if (spacetime::in_future(x, op.event)) continue;  // vertex ahead of x: no reduction yet
        const auto v = t.value_of(op.id);
        if (!v) throw ValidationError("transcript lacks an outcome for '" + op.id + "'");
        reductions.push_back({op.event, m, *v});
    }
    // chronological order: time-like ordered vertices apply earlier-first;
    // space-like pairs commute, so lab time is a valid total order
    std::stable_sort(reductions.begin(), reductions.end(),
                     [](const Reduction& a, const Reduction& b) { return a.event.t < b.event.t; });
    QState state = s.initial;
    for (const auto& r : reductions)
        state = measurement::collapse(state, r.action->observable, r.outcome);
    return state;
}

std::map<OutcomeKey, double> enumerate_distribution(const Scenario& s,
                                                    const std::vector<std::size_t>& order) {
    std::map<OutcomeKey, double> dist;
    const auto key_value = [](double v) { return std::llround(v * 1e6); };

    std::function<void(std::size_t, const QState&, OutcomeKey, double)> walk =
        [&](std::size_t pos, const QState& state, OutcomeKey key, double weight) {
            if (weight <= 1e-15) return;
            if (pos == order.size()) {
                // canonical key, independent of the application order
                std::sort(key.entries.begin(), key.entries.end());
                dist[key] += weight;
                return;
            }
            const auto& op = s.ops[order[pos]];
            if (const auto* k = std::get_if<KickAction>(&op.action)) {
                walk(pos + 1, measurement::kick(state, k->pair_id, k->particle, k->axis,
                                                k->strength),
                     std::move(key), weight);
                return;
            }
            if (const auto* u = std::get_if<SpinUnitaryAction>(&op.action)) {
                walk(pos + 1, measurement::apply_unitary(state, u->op), std::move(key), weight);
                return;
            }
            if (const auto* m = std::get_if<SpinMeasureAction>(&op.action)) {
                const Distribution d = measurement::born(state, m->observable);
                for (const auto& [eig, p] : d.p) {
                    if (p <= 1e-15) continue;
                    OutcomeKey next = key;
                    next.entries.emplace_back(op.id, key_value(eig));
                    walk(pos + 1, measurement::collapse(state, m->observable, eig), std::move(next),
                         weight * p);
                }
                return;
            }
            const auto& pi = std::get<PiMeasureAction>(op.action);
            Rng dummy(0);
            if (pi.particle == 2) {
                auto res = measurement::measure_pi(state, pi.pair_id, 2, dummy, 0.0);
                walk(pos + 1, res.after, std::move(key), weight);
                return;
            }
            for (const auto& [shift, p] : measurement::pi1_distribution(state, pi.pair_id)) {
                if (p <= 1e-15) continue;
                auto res = measurement::measure_pi(state, pi.pair_id, 1, dummy, shift);
                OutcomeKey next = key;
                next.entries.emplace_back(op.id, key_value(shift));
                walk(pos + 1, res.after, std::move(next), weight * p);
            }
        };

    OutcomeKey root;
    walk(0, s.initial, root, 1.0);
    return dist;
}

std::vector<std::vector<std::size_t>> admissible_orders(const Scenario& s, std::size_t limit) {
    // partial order: only space-like separated ops may be reordered; light
    // cone contacts keep their time order as well
    const std::size_t n = s.ops.size();
    std::vector<std::vector<bool>> before(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (spacetime::classify(s.ops[i].event, s.ops[j].event) ==
                spacetime::CausalClass::spacelike)
                continue;
            if (s.ops[i].event.t < s.ops[j].event.t) before[i][j] = true;
        }

    std::vector<std::vector<std::size_t>> orders;
    std::vector<std::size_t> current;
    std::vector<bool> used(n, false);
    std::function<void()> extend = [&] {
        if (orders.size() >= limit) return;
        if (current.size() == n) {
            orders.push_back(current);
            return;
        }
        for (std::size_t cand = 0; cand < n; ++cand) {
            if (used[cand]) continue;
            bool ready = true;
            for (std::size_t other = 0; other < n; ++other)
                if (!used[other] && other != cand && before[other][cand]) ready = false;
            if (!ready) continue;
            used[cand] = true;
            current.push_back(cand);
            extend();
            current.pop_back();
            used[cand] = false;
        }
    };
    extend();
    return orders;
}

// --- named experiments -------------------------------------------------------

namespace {

LinOp spin_obs(const std::array<double, 3>& axis, std::size_t particle) {
    return hilbert::embed(hilbert::pauli(axis), particle, {2, 2});
}

}  // namespace

double eprb_correlation(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    const QState singlet = QState::from_ket(hilbert::singlet());
    return measurement::joint_prob(singlet, spin_obs(a, 0), spin_obs(b, 1)).correlation();
}

double chsh(const std::array<double, 3>& a, const std::array<double, 3>& a2,
            const std::array<double, 3>& b, const std::array<double, 3>& b2) {
    return std::abs(eprb_correlation(a, b) - eprb_correlation(a, b2) + eprb_correlation(a2, b) +
                    eprb_correlation(a2, b2));
}

Scenario eprb_scenario(const std::array<double, 3>& axis_a, const std::array<double, 3>& axis_b) {
    Scenario s;
    s.initial = QState::from_ket(hilbert::singlet());
    s.ops.push_back({"sgm1", Event{1.0, -1.0, 0.0, 0.0},
                     SpinMeasureAction{spin_obs(axis_a, 0), "sigma_a(1)"}});
    s.ops.push_back({"sgm2", Event{1.0, +1.0, 0.0, 0.0},
                     SpinMeasureAction{spin_obs(axis_b, 1), "sigma_b(2)"}});
    s.scheme = SolutionII{FlatFamily{}};
    return s;
}

EprbSample sample_eprb(const std::array<double, 3>& a, const std::array<double, 3>& b, Rng& rng) {
    const QState singlet = QState::from_ket(hilbert::singlet());
    const auto joint = measurement::joint_prob(singlet, spin_obs(a, 0), spin_obs(b, 1));
    std::vector<double> weights;
    for (const auto& row : joint.p)
        for (double p : row) weights.push_back(p);
    const std::size_t pick = rng.pick(weights);
    const std::size_t nb = joint.eigs_b.size();
    return {static_cast<int>(std::lround(joint.eigs_a[pick / nb])),
            static_cast<int>(std::lround(joint.eigs_b[pick % nb]))};
}

namespace {

/// Simultaneous-procedure op list: per axis, kicks on both wings on one leaf,
/// readouts afterwards.
Scenario aa_scenario(const Ket& initial, double strength) {
    Scenario s;
    s.initial = QState::from_ket(initial);
    const struct {
        Axis axis;
        const char* id;
    } axes[3] = {{Axis::x, "x"}, {Axis::y, "y"}, {Axis::z, "z"}};
    for (const auto& ax : axes) s.probes.add(ax.id, ax.axis);
    double t = 0.0;
    for (const auto& ax : axes) {
        // both kicks of one axis share a leaf; axis blocks follow one another
        s.ops.push_back({std::string("kick2_") + ax.id, Event{t, +1.0, 0, 0},
                         KickAction{ax.id, 2, ax.axis, strength}});
        s.ops.push_back({std::string("kick1_") + ax.id, Event{t, -1.0, 0, 0},
                         KickAction{ax.id, 1, ax.axis, strength}});
        t += 0.125;
    }
    double tr = 4.0;
    for (const auto& ax : axes) {
        s.ops.push_back({std::string("pi2_") + ax.id, Event{tr, +1.0, 0, 0},
                         PiMeasureAction{ax.id, 2}});
        s.ops.push_back({std::string("pi1_") + ax.id, Event{tr + 0.5, -1.0, 0, 0},
                         PiMeasureAction{ax.id, 1}});
        tr += 1.0;
    }
    s.scheme = SolutionII{FlatFamily{}};
    return s;
}

}  // namespace

AaResult aa_simultaneous(const Ket& initial, std::uint64_t seed, double strength) {
    const Scenario s = aa_scenario(initial, strength);
    Transcript t = run(s, seed);
    AaResult out;
    const char* ids[3] = {"pi1_x", "pi1_y", "pi1_z"};
    for (int i = 0; i < 3; ++i) out.sums[i] = t.sum_of(ids[i]).value();
    out.fidelity_to_initial = 0.0;
    if (t.final_state.terms.size() == 1)
        out.fidelity_to_initial = hilbert::fidelity(initial.amps, t.final_state.single_spin());
    out.post = t.final_state;
    out.transcript = std::move(t);
    return out;
}

double aa_verification_probability(const Ket& initial, double strength) {
    Scenario s = aa_scenario(initial, strength);
    // weight of the all-sums-zero outcome from the kick block alone
    QState state = s.initial;
    for (const auto& op : s.ops)
        if (const auto* k = std::get_if<KickAction>(&op.action))
            state = measurement::kick(state, k->pair_id, k->particle, k->axis, k->strength);
    double zero_weight = 0.0;
    const double total = state.norm2();
    for (const auto& term : state.terms) {
        bool all_zero = true;
        for (const auto& [id, label] : term.labels) {
            const auto& e = std::get<probe::Epr>(label);
            if (std::abs(e.shift) > 1e-9) all_zero = false;
        }
        if (all_zero) zero_weight += term.spin.squaredNorm();
    }
    return zero_weight / total;
}

AaDisplacedResult aa_time_displaced(std::uint64_t seed, double strength,
                                    std::optional<double> pinned_pi2) {
    Scenario s;
    s.initial = QState::from_ket(hilbert::singlet());
    s.probes.add("z", Axis::z);
    const Event e_k2{0.0, +1.0, 0, 0};
    const Event e_p2{1.0, +1.0, 0, 0};
    const Event e_k1{2.0, -1.0, 0, 0};
    const Event e_p1{3.0, -1.0, 0, 0};
    s.ops.push_back({"kick2", e_k2, KickAction{"z", 2, Axis::z, strength}});
    s.ops.push_back({"pi2", e_p2, PiMeasureAction{"z", 2}});
    s.ops.push_back({"kick1", e_k1, KickAction{"z", 1, Axis::z, strength}});
    s.ops.push_back({"pi1", e_p1, PiMeasureAction{"z", 1}});
    s.scheme = SolutionII{EventOrder{{e_k2, e_p2, e_k1, e_p1}}};
    if (pinned_pi2) s.pinned["pi2"] = *pinned_pi2;

    // intermediate state: replay the first two ops
    Rng rng(seed);
    validate(s);
    AaDisplacedResult out;
    QState state = s.initial;
    Transcript t;
    t.order = sweep(s);
    for (std::size_t pos = 0; pos < t.order.size(); ++pos) {
        AppliedOp applied = apply_op(s, state, s.ops[t.order[pos]], rng, s.pinned);
        state = applied.after;
        t.outcomes.push_back(applied.entry);
        if (s.ops[t.order[pos]].id == "pi2") {
            out.intermediate = state;
            out.pi2 = applied.entry.eigenvalue;
            const double total = state.norm2();
            for (const auto& term : state.terms) {
                const auto& c = std::get<probe::Collapsed>(term.labels.at("z"));
                out.intermediate_branches.emplace_back(c.shift, term.spin.squaredNorm() / total);
            }
            std::sort(out.intermediate_branches.begin(), out.intermediate_branches.end());
        }
        if (s.ops[t.order[pos]].id == "pi1") {
            out.pi1 = applied.entry.eigenvalue;
            out.sum = *applied.entry.pair_sum;
        }
    }
    out.final_state = state;
    out.fidelity_to_singlet =
        hilbert::fidelity(hilbert::singlet().amps, out.final_state.single_spin());
    return out;
}

AaFoliationResult aa_under_foliation(Axis axis, std::uint64_t seed, double sz2, double strength) {
    Scenario s;
    s.initial = QState::from_ket(hilbert::singlet());
    const std::string pid = probe::to_string(axis);
    s.probes.add(pid, axis);
    const LinOp sz_1 = hilbert::embed({{2}, hilbert::sigma_z()}, 0, {2, 2});
    const LinOp sz_2 = hilbert::embed({{2}, hilbert::sigma_z()}, 1, {2, 2});

    const Event e_k2{0.0, +1.0, 0, 0};
    const Event e_p2{1.0, +1.5, 0, 0};
    const Event e_m2{2.0, +1.0, 0, 0};
    const Event e_k1{3.0, -1.0, 0, 0};
    const Event e_p1{4.0, -1.5, 0, 0};
    const Event e_m1{5.0, -1.0, 0, 0};
    s.ops.push_back({"kick2", e_k2, KickAction{pid, 2, axis, strength}});
    s.ops.push_back({"pi2", e_p2, PiMeasureAction{pid, 2}});
    s.ops.push_back({"sgm2", e_m2, SpinMeasureAction{sz_2, "sigma_z(2)"}});
    s.ops.push_back({"kick1", e_k1, KickAction{pid, 1, axis, strength}});
    s.ops.push_back({"pi1", e_p1, PiMeasureAction{pid, 1}});
    s.ops.push_back({"sgm1", e_m1, SpinMeasureAction{sz_1, "sigma_z(1)"}});
    s.scheme = SolutionII{EventOrder{{e_k2, e_p2, e_m2, e_k1, e_p1, e_m1}}};
    s.pinned["sgm2"] = sz2;

    Rng rng(seed);
    validate(s);
    AaFoliationResult out;
    out.sz2 = sz2;
    QState state = s.initial;
    for (std::size_t idx : sweep(s)) {
        const auto& op = s.ops[idx];
        if (op.id == "sgm1") {
            const Distribution d = measurement::born(state, sz_1);
            out.p_sz1_plus = d.prob_of(+1.0);
        }
        if (op.id == "pi1") {
            AppliedOp applied = apply_op(s, state, op, rng, s.pinned);
            out.sum = *applied.entry.pair_sum;
            state = applied.after;
            out.final_state = state;
            const Ket up_down = hilbert::basis_ket({2, 2}, sz2 < 0 ? 1 : 2);
            out.fidelity_to_up_down = hilbert::fidelity(up_down.amps, state.single_spin());
            continue;
        }
        state = apply_op(s, state, op, rng, s.pinned).after;
    }
    return out;
}

MonitoringResult monitoring_conflict(MonitorLayout layout, double strength) {
    Scenario s;
    s.initial = QState::from_ket(hilbert::singlet());
    s.probes.add("z'", Axis::z, "primed");
    s.probes.add("x", Axis::x);
    s.probes.add("y", Axis::y);
    s.probes.add("z", Axis::z);

    Rng rng(0);
    QState state = s.initial;
    const auto primed_kick2 = [&] { state = measurement::kick(state, "z'", 2, Axis::z, strength); };
    const auto primed_pi2 = [&] {
        state = measurement::measure_pi(state, "z'", 2, rng, 0.0).after;
    };
    const auto primed_rest = [&] {
        state = measurement::kick(state, "z'", 1, Axis::z, strength);
        state = measurement::measure_pi(state, "z'", 1, rng).after;
    };
    const auto unprimed_kicks = [&] {
        for (Axis ax : {Axis::x, Axis::y, Axis::z}) {
            const std::string pid = probe::to_string(ax);
            state = measurement::kick(state, pid, 2, ax, strength);
            state = measurement::kick(state, pid, 1, ax, strength);
        }
    };

    switch (layout) {
        case MonitorLayout::interleaved:
            primed_kick2();
            primed_pi2();
            unprimed_kicks();
            break;
        case MonitorLayout::no_primed:
            unprimed_kicks();
            break;
        case MonitorLayout::primed_first:
            primed_kick2();
            primed_pi2();
            primed_rest();
            unprimed_kicks();
            break;
    }

    // probability that every unprimed pair sum vanishes
    double zero_weight = 0.0;
    const double total = state.norm2();
    for (const auto& term : state.terms) {
        bool all_zero = true;
        for (const char* pid : {"x", "y", "z"}) {
            const auto it = term.labels.find(pid);
            const auto& e = std::get<probe::Epr>(it->second);
            if (std::abs(e.shift) > 1e-9) all_zero = false;
        }
        if (all_zero) zero_weight += term.spin.squaredNorm();
    }
    return {zero_weight / total};
}

HkRefutationResult hk_refutation() {
    // EPRB with pinned anticorrelated outcomes; magnets fire at t0 = 1
    Scenario s = eprb_scenario({0, 0, 1}, {0, 0, 1});
    s.scheme = HellwigKraus{};
    s.pinned["sgm1"] = +1.0;
    s.pinned["sgm2"] = -1.0;
    Transcript t = run(s, 0);

    HkRefutationResult out;
    // slice just before the magnets: each wing already sees the other wing's
    // reduction through its backward light-cone
    const Event wing1{1.0 - 1e-3, -1.0, 0, 0};
    const QState hk1 = hk_state_at_point(s, t, wing1);
    out.hk_wing_state = Ket{hk1.dims, hk1.single_spin()};
    out.p_verify_hk = aa_verification_probability(out.hk_wing_state);
    out.p_verify_schemes = aa_verification_probability(hilbert::singlet());
    out.mass = out.p_verify_schemes - out.p_verify_hk;
    return out;
}

ReducedDensityResult reduced_density_demo() {
    // density-matrix route through the algebraic singlet projector keeps all
    // entries exact dyadics
    const Mat rho_sigma = hilbert::singlet_projector().mat;
    Mat proj = Mat::Zero(4, 4);
    proj(1, 1) = 1;  // sigma_z(2) = -1 keeps |ud>
    proj(3, 3) = 1;  // ... and |dd>
    Mat rho_xi = proj * rho_sigma * proj;
    rho_xi /= rho_xi.trace().real();

    ReducedDensityResult out;
    out.rho_sigma_red = hilbert::partial_trace({{2, 2}, rho_sigma}, 0).mat;
    out.rho_xi_red = hilbert::partial_trace({{2, 2}, rho_xi}, 0).mat;
    return out;
}

ThreeRegionResult three_region_demo() {
    // one particle on three separated regions; negative detections at x1 and
    // x2, space-like to each other
    const double r = 1.0 / std::sqrt(3.0);
    Ket initial{{3}, hilbert::Vec::Zero(3)};
    initial.amps << r, r, r;

    Scenario s;
    s.initial = QState::from_ket(initial);
    Mat not1 = Mat::Zero(3, 3);
    not1(1, 1) = 1;
    not1(2, 2) = 1;  // projector "not found at x1"
    Mat not2 = Mat::Zero(3, 3);
    not2(0, 0) = 1;
    not2(2, 2) = 1;  // projector "not found at x2"
    const Event e1{0.0, -2.0, 0, 0};
    const Event e2{1.0, +6.0, 0, 0};  // space-like to e1
    s.ops.push_back({"d1", e1, SpinMeasureAction{{{3}, not1}, "found_at_x1"}});
    s.ops.push_back({"d2", e2, SpinMeasureAction{{{3}, not2}, "found_at_x2"}});
    s.scheme = SolutionI{{}};
    s.pinned["d1"] = 1.0;  // eigenvalue 1 of the projector = not found
    s.pinned["d2"] = 1.0;

    Transcript t = run(s, 0);
    ThreeRegionResult out;
    // lab frame: between the detections only d1 has happened
    const Hyperplane mid_lab{Event{1, 0, 0, 0}, 0.5};
    out.k_frame_mid = Ket{{3}, state_on_surface(t, s, mid_lab).state.single_spin()};
    // boosted frame: a tilted surface that has d2 in its past but not d1
    const double chi = 0.5;
    const Event n_boost = spacetime::boost(Event{1, 0, 0, 0}, -chi);
    const Hyperplane mid_boost{n_boost, spacetime::minkowski_dot(n_boost, Event{0.5, 2.5, 0, 0})};
    out.k_prime_frame_mid = Ket{{3}, state_on_surface(t, s, mid_boost).state.single_spin()};
    return out;
}

// --- scenario files ----------------------------------------------------------

namespace {

using nlohmann::json;

Event parse_event(const json& j) {
    if (!j.is_array() || j.size() != 4)
        throw ValidationError("events must be 4-tuples of numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

Axis parse_axis(const std::string& a) {
    if (a == "x") return Axis::x;
    if (a == "y") return Axis::y;
    if (a == "z") return Axis::z;
    throw ValidationError("axis must be one of x, y, z");
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end())
            throw ValidationError("unknown field '" + key + "' in " + where);
    }
}

}  // namespace

Scenario load_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("scenario file is not valid JSON: ") + e.what());
    }
    reject_unknown(j, {"schema", "initial", "probes", "ops", "scheme", "pinned"}, "scenario");
    if (!j.contains("schema") || j["schema"].get<int>() != 1)
        throw ValidationError("scenario file must declare schema: 1");

    Scenario s;
    const std::string initial = j.value("initial", std::string("singlet"));
    if (initial == "singlet") s.initial = QState::from_ket(hilbert::singlet());
    else if (initial == "up_down") s.initial = QState::from_ket(hilbert::basis_ket({2, 2}, 1));
    else if (initial == "down_up") s.initial = QState::from_ket(hilbert::basis_ket({2, 2}, 2));
    else if (initial == "up_up") s.initial = QState::from_ket(hilbert::basis_ket({2, 2}, 0));
    else throw ValidationError("unknown initial state '" + initial + "'");

    if (j.contains("probes")) {
        for (const auto& p : j["probes"]) {
            reject_unknown(p, {"id", "axis", "group"}, "probe entry");
            s.probes.add(p.at("id").get<std::string>(), parse_axis(p.at("axis").get<std::string>()),
                         p.value("group", std::string("default")));
        }
    }
    for (const auto& op : j.at("ops")) {
        reject_unknown(op, {"id", "event", "action", "pair", "particle", "axis", "strength",
                            "direction", "subsystem"},
                       "op entry");
        TimelineOp t;
        t.id = op.at("id").get<std::string>();
        t.event = parse_event(op.at("event"));
        const std::string action = op.at("action").get<std::string>();
        if (action == "kick") {
            t.action = KickAction{op.at("pair").get<std::string>(), op.at("particle").get<int>(),
                                  parse_axis(op.at("axis").get<std::string>()),
                                  op.value("strength", 1.0)};
        } else if (action == "pi_measure") {
            t.action = PiMeasureAction{op.at("pair").get<std::string>(),
                                       op.at("particle").get<int>()};
        } else if (action == "spin_measure") {
            const auto dir = op.at("direction");
            const std::array<double, 3> u{dir[0].get<double>(), dir[1].get<double>(),
                                          dir[2].get<double>()};
            const int subsystem = op.at("subsystem").get<int>();
            t.action = SpinMeasureAction{spin_obs(u, static_cast<std::size_t>(subsystem - 1)),
                                         "sigma(" + std::to_string(subsystem) + ")"};
        } else {
            throw ValidationError("unknown action '" + action + "'");
        }
        s.ops.push_back(std::move(t));
    }

    if (j.contains("scheme")) {
        const auto& sch = j["scheme"];
        reject_unknown(sch, {"kind", "order", "normal"}, "scheme");
        const std::string kind = sch.at("kind").get<std::string>();
        if (kind == "solution2_flat") {
            FlatFamily fam;
            if (sch.contains("normal")) fam.normal = parse_event(sch["normal"]);
            s.scheme = SolutionII{fam};
        } else if (kind == "solution2_order") {
            EventOrder order;
            for (const auto& e : sch.at("order")) order.order.push_back(parse_event(e));
            s.scheme = SolutionII{order};
        } else if (kind == "solution1") {
            s.scheme = SolutionI{{}};
        } else if (kind == "hellwig_kraus") {
            s.scheme = HellwigKraus{};
        } else {
            throw ValidationError("unknown scheme kind '" + kind + "'");
        }
    }
    if (j.contains("pinned"))
        for (const auto& [op_id, value] : j["pinned"].items())
            s.pinned[op_id] = value.get<double>();
    return s;
}

std::string transcript_json(const Transcript& t) {
    json j;
    j["weight"] = t.weight;
    j["outcomes"] = json::array();
    for (const auto& e : t.outcomes) {
        json o;
        o["op"] = e.op_id;
        o["observable"] = e.observable;
        o["value"] = e.eigenvalue;
        o["probability"] = e.probability;
        if (e.pair_sum) o["pair_sum"] = *e.pair_sum;
        j["outcomes"].push_back(std::move(o));
    }
    return j.dump(2);
}

}  // namespace minkqm::scenarios
