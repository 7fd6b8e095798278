#include "minkqm/measurement.hpp"

#include <algorithm>
#include <cmath>

namespace minkqm::measurement {

using hilbert::Cplx;
using hilbert::Mat;

QState QState::from_ket(const Ket& k) {
    QState s;
    s.dims = k.dims;
    s.terms.push_back({{}, k.amps});
    return s;
}

double QState::norm2() const {
    double n = 0.0;
    for (const auto& t : terms) n += t.spin.squaredNorm();
    return n;
}

void QState::merge(double label_tol) {
    std::vector<Term> merged;
    for (auto& t : terms) {
        if (t.spin.squaredNorm() == 0.0) continue;
        bool found = false;
        for (auto& m : merged) {
            if (m.labels.size() != t.labels.size()) continue;
            bool same = true;
            for (const auto& [id, label] : t.labels) {
                auto it = m.labels.find(id);
                if (it == m.labels.end() || !probe::labels_equal(it->second, label, label_tol)) {
                    same = false;
                    break;
                }
            }
            if (same) {
                m.spin += t.spin;
                found = true;
                break;
            }
        }
        if (!found) merged.push_back(std::move(t));
    }
    // summing branches can cancel a term entirely
    std::erase_if(merged, [](const Term& t) { return t.spin.squaredNorm() == 0.0; });
    terms = std::move(merged);
}

void QState::normalize() {
    const double n = std::sqrt(norm2());
    if (n == 0.0) throw ZeroProbabilityOutcome("cannot normalize a null state");
    for (auto& t : terms) t.spin /= n;
}

const Vec& QState::single_spin() const {
    if (terms.size() != 1)
        throw Error("state has " + std::to_string(terms.size()) + " branches, expected one");
    return terms.front().spin;
}

double Distribution::prob_of(double eigenvalue, double tol) const {
    for (const auto& [e, prob] : p)
        if (std::abs(e - eigenvalue) <= tol) return prob;
    return 0.0;
}

double Distribution::total() const {
    double s = 0.0;
    for (const auto& [e, prob] : p) s += prob;
    return s;
}

namespace {

void check_dims(const QState& s, const LinOp& op) {
    if (op.mat.rows() != hilbert::total_dim(s.dims))
        throw DimMismatch("observable does not act on the state's spin space");
}

}  // namespace

Distribution born(const QState& s, const LinOp& obs) {
    check_dims(s, obs);
    const auto decomp = hilbert::spectral(obs);
    const double total = s.norm2();
    Distribution d;
    for (const auto& space : decomp.spaces) {
        double w = 0.0;
        for (const auto& t : s.terms) w += (space.projector * t.spin).squaredNorm();
        d.p.emplace_back(space.eigenvalue, w / total);
    }
    return d;
}

QState collapse(const QState& s, const LinOp& obs, double outcome) {
    check_dims(s, obs);
    const auto decomp = hilbert::spectral(obs);
    const hilbert::EigenSpace* match = nullptr;
    for (const auto& space : decomp.spaces)
        if (std::abs(space.eigenvalue - outcome) <= 1e-8) match = &space;
    if (!match) throw ZeroProbabilityOutcome("no eigenvalue near the requested outcome");

    QState out;
    out.dims = s.dims;
    for (const auto& t : s.terms) out.terms.push_back({t.labels, match->projector * t.spin});
    out.merge();
    if (out.norm2() <= 1e-24 * s.norm2())
        throw ZeroProbabilityOutcome("outcome has zero probability in this state");
    out.normalize();
    return out;
}

QState apply_unitary(const QState& s, const LinOp& u) {
    check_dims(s, u);
    QState out;
    out.dims = s.dims;
    for (const auto& t : s.terms) out.terms.push_back({t.labels, u.mat * t.spin});
    out.merge();
    return out;
}

QState external_field(const QState& s, const LinOp& b, double k) {
    if (!hilbert::is_hermitian(b.mat, 1e-10))
        throw NotHermitian("external field generator must be hermitian");
    return apply_unitary(s, hilbert::exp_hermitian(b, k));
}

Distribution JointDistribution::marginal_a() const {
    Distribution d;
    for (std::size_t i = 0; i < eigs_a.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < eigs_b.size(); ++j) sum += p[i][j];
        d.p.emplace_back(eigs_a[i], sum);
    }
    return d;
}

Distribution JointDistribution::marginal_b() const {
    Distribution d;
    for (std::size_t j = 0; j < eigs_b.size(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < eigs_a.size(); ++i) sum += p[i][j];
        d.p.emplace_back(eigs_b[j], sum);
    }
    return d;
}

double JointDistribution::correlation() const {
    double e = 0.0;
    for (std::size_t i = 0; i < eigs_a.size(); ++i)
        for (std::size_t j = 0; j < eigs_b.size(); ++j) e += eigs_a[i] * eigs_b[j] * p[i][j];
    return e;
}

JointDistribution joint_prob(const QState& s, const LinOp& a, const LinOp& b) {
    check_dims(s, a);
    check_dims(s, b);
    const auto rep = hilbert::commutes(a, b);
    if (!rep.commute)
        throw NonCommuting("joint distribution needs commuting observables, max |[A,B]| = " +
                           std::to_string(rep.max_entry));
    const auto da = hilbert::spectral(a);
    const auto db = hilbert::spectral(b);
    const double total = s.norm2();

    JointDistribution out;
    for (const auto& sa : da.spaces) out.eigs_a.push_back(sa.eigenvalue);
    for (const auto& sb : db.spaces) out.eigs_b.push_back(sb.eigenvalue);
    out.p.assign(da.spaces.size(), std::vector<double>(db.spaces.size(), 0.0));
    for (std::size_t i = 0; i < da.spaces.size(); ++i) {
        for (std::size_t j = 0; j < db.spaces.size(); ++j) {
            double w = 0.0;
            for (const auto& t : s.terms)
                w += (db.spaces[j].projector * (da.spaces[i].projector * t.spin)).squaredNorm();
            out.p[i][j] = w / total;
        }
    }
    return out;
}

namespace {

double tv_distance(const Distribution& a, const Distribution& b) {
    double d = 0.0;
    for (const auto& [eig, pa] : a.p) d += std::abs(pa - b.prob_of(eig));
    // eigenvalues present only on one side
    for (const auto& [eig, pb] : b.p)
        if (a.prob_of(eig) == 0.0 && pb != 0.0) d += pb;
    return 0.5 * d;
}

}  // namespace

double no_signaling_audit(const QState& s, const LinOp& obs_a,
                          const std::vector<Intervention>& interventions,
                          bool enforce_commutation) {
    const Distribution baseline = born(s, obs_a);
    double max_dev = 0.0;
    for (const auto& intervention : interventions) {
        if (enforce_commutation) {
            for (const auto& step : intervention) {
                const LinOp& op = std::holds_alternative<MeasureStep>(step)
                                      ? std::get<MeasureStep>(step).observable
                                      : std::get<UnitaryStep>(step).generator;
                const auto rep = hilbert::commutes(obs_a, op);
                if (!rep.commute)
                    throw NonCommuting("intervention fails local commutativity, max |[A,B]| = " +
                                       std::to_string(rep.max_entry));
            }
        }
        // Unselective interventions turn a pure state into a mixture; track
        // weighted branches explicitly.
        std::vector<std::pair<double, QState>> mixture{{1.0, s}};
        for (const auto& step : intervention) {
            std::vector<std::pair<double, QState>> next;
            if (const auto* m = std::get_if<MeasureStep>(&step)) {
                for (const auto& [w, state] : mixture) {
                    const Distribution d = born(state, m->observable);
                    for (const auto& [eig, prob] : d.p) {
                        if (prob <= 1e-15) continue;
                        next.emplace_back(w * prob, collapse(state, m->observable, eig));
                    }
                }
            } else {
                const auto& u = std::get<UnitaryStep>(step);
                for (const auto& [w, state] : mixture)
                    next.emplace_back(w, external_field(state, u.generator, u.k));
            }
            mixture = std::move(next);
        }
        Distribution mixed = baseline;
        for (auto& [eig, prob] : mixed.p) prob = 0.0;
        for (const auto& [w, state] : mixture) {
            const Distribution d = born(state, obs_a);
            for (auto& [eig, prob] : mixed.p) prob += w * d.prob_of(eig);
        }
        max_dev = std::max(max_dev, tv_distance(baseline, mixed));
    }
    return max_dev;
}

SigmaTotSqReport sigma_tot_sq_demo() {
    using hilbert::basis_ket;
    const Dims dims{2, 2};
    const LinOp p_singlet = hilbert::singlet_projector();
    const LinOp p_triplet = hilbert::triplet_projector();
    const LinOp sz1_minus = {dims, [] {
                                 Mat m = Mat::Zero(4, 4);
                                 m(2, 2) = 1;
                                 m(3, 3) = 1;
                                 return m;
                             }()};

    const auto run = [&](bool flip) {
        QState state = QState::from_ket(basis_ket(dims, 0));  // |uu>
        if (flip) {
            // pi/2 pulse around x on particle 2 flips |u> to |d> up to phase
            const LinOp sx2 = hilbert::embed({{2}, hilbert::sigma_x()}, 1, dims);
            state = external_field(state, sx2, M_PI / 2.0);
        }
        // projective (sigma_tot)^2 measurement, both outcomes kept
        double p_minus = 0.0;
        const double total = state.norm2();
        for (const LinOp* proj : {&p_singlet, &p_triplet}) {
            for (const auto& t : state.terms)
                p_minus += (sz1_minus.mat * (proj->mat * t.spin)).squaredNorm();
        }
        return p_minus / total;
    };

    return {run(false), run(true)};
}

LinOp axis_operator(Axis axis) {
    switch (axis) {
        case Axis::x: return {{2}, hilbert::sigma_x()};
        case Axis::y: return {{2}, hilbert::sigma_y()};
        case Axis::z: return {{2}, hilbert::sigma_z()};
    }
    throw Error("bad axis");
}

QState kick(const QState& s, const std::string& pair_id, int particle, Axis axis,
            double strength) {
    if (particle != 1 && particle != 2) throw ValidationError("kick particle must be 1 or 2");
    const LinOp sigma = hilbert::embed(axis_operator(axis), static_cast<std::size_t>(particle - 1),
                                       s.dims);
    const Mat id = hilbert::identity(sigma.mat.rows());
    const Mat p_plus = 0.5 * (id + sigma.mat);
    const Mat p_minus = 0.5 * (id - sigma.mat);

    QState out;
    out.dims = s.dims;
    for (const auto& t : s.terms) {
        auto it = t.labels.find(pair_id);
        const ProbeLabel current = it != t.labels.end() ? it->second : probe::prepare_epr();
        const struct {
            const Mat* proj;
            double m;
        } branches[2] = {{&p_plus, +1.0}, {&p_minus, -1.0}};
        for (const auto& br : branches) {
            Vec part = (*br.proj) * t.spin;
            if (part.squaredNorm() == 0.0) continue;
            Term nt;
            nt.labels = t.labels;
            nt.labels[pair_id] = probe::shift(current, particle, -strength * br.m);
            nt.spin = std::move(part);
            out.terms.push_back(std::move(nt));
        }
    }
    out.merge();
    return out;
}

std::vector<std::pair<double, double>> pi1_distribution(const QState& s,
                                                        const std::string& pair_id) {
    std::vector<std::pair<double, double>> groups;  // (shift, weight)
    const double total = s.norm2();
    for (const auto& t : s.terms) {
        auto it = t.labels.find(pair_id);
        if (it == t.labels.end())
            throw NotCollapsed("pair '" + pair_id + "' has no label on some branch");
        const auto* c = std::get_if<probe::Collapsed>(&it->second);
        if (!c) throw NotCollapsed("pi1 readout needs pi2 done first on pair '" + pair_id + "'");
        const double w = t.spin.squaredNorm() / total;
        bool found = false;
        for (auto& [shift, weight] : groups) {
            if (std::abs(shift - c->shift) <= 1e-9) {
                weight += w;
                found = true;
                break;
            }
        }
        if (!found) groups.emplace_back(c->shift, w);
    }
    std::sort(groups.begin(), groups.end());
    return groups;
}

PiMeasurement measure_pi(const QState& s, const std::string& pair_id, int particle, Rng& rng,
                         std::optional<double> pinned) {
    PiMeasurement out;
    out.after.dims = s.dims;

    if (particle == 2) {
        // The improper uniform marginal fixes no outcome statistics; the
        // sampled value is configuration, not physics.
        const double pi2 = pinned.value_or(rng.normal());
        out.value = pi2;
        out.probability = 1.0;
        for (const auto& t : s.terms) {
            auto it = t.labels.find(pair_id);
            const ProbeLabel label = it != t.labels.end() ? it->second : probe::prepare_epr();
            Term nt = t;
            nt.labels[pair_id] = probe::measure_pi2(label, pi2).after;
            out.after.terms.push_back(std::move(nt));
        }
        out.after.merge();
        return out;
    }
    if (particle != 1) throw ValidationError("pi readout particle must be 1 or 2");

    const auto groups = pi1_distribution(s, pair_id);
    std::size_t chosen = groups.size();
    if (pinned) {
        // pinned particle-1 readouts are addressed by the pair sum pi1+pi2,
        // the quantity that actually distinguishes branches
        for (std::size_t i = 0; i < groups.size(); ++i)
            if (std::abs(groups[i].first - *pinned) <= 1e-9) chosen = i;
        if (chosen == groups.size())
            throw ZeroProbabilityConditioning("pinned pi1 outcome has zero probability");
    } else {
        std::vector<double> weights;
        for (const auto& [shift, w] : groups) weights.push_back(w);
        chosen = rng.pick(weights);
    }

    const double shift = groups[chosen].first;
    out.probability = groups[chosen].second;
    out.pair_sum = shift;
    bool have_value = false;
    for (const auto& t : s.terms) {
        const auto& label = t.labels.at(pair_id);
        const auto& c = std::get<probe::Collapsed>(label);
        if (std::abs(c.shift - shift) > 1e-9) continue;
        const auto readout = probe::measure_pi1(label);
        if (!have_value) {
            out.value = readout.value;
            have_value = true;
        }
        Term nt = t;
        nt.labels[pair_id] = readout.after;
        out.after.terms.push_back(std::move(nt));
    }
    out.after.merge();
    out.after.normalize();
    return out;
}

}  // namespace minkqm::measurement
