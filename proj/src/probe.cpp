#include "minkqm/probe.hpp"

#include <cmath>

namespace minkqm::probe {

const char* to_string(Axis a) {
    switch (a) {
        case Axis::x: return "x";
        case Axis::y: return "y";
        case Axis::z: return "z";
    }
    return "?";
}

ProbeLabel prepare_epr() { return Epr{0.0}; }

ProbeLabel shift(const ProbeLabel& label, int particle, double xi) {
    if (std::holds_alternative<Consumed>(label))
        throw ConsumedLabel("shift on a consumed probe pair");
    if (const auto* e = std::get_if<Epr>(&label)) return Epr{e->shift + xi};
    const auto& c = std::get<Collapsed>(label);
    if (particle != 1)
        throw ShiftOnMeasuredParticle("particle 2 was already read out");
    return Collapsed{c.shift + xi, c.pi2};
}

Pi2Readout measure_pi2(const ProbeLabel& label, double sampled_pi2) {
    const auto* e = std::get_if<Epr>(&label);
    if (!e) throw AlreadyCollapsed("pi2 was already read out on this pair");
    return {sampled_pi2, Collapsed{e->shift, sampled_pi2}};
}

Pi1Readout measure_pi1(const ProbeLabel& label) {
    const auto* c = std::get_if<Collapsed>(&label);
    if (!c) throw NotCollapsed("pi1 readout needs a collapsed pair (pi2 first)");
    return {c->pi1(), c->shift, Consumed{}};
}

bool labels_equal(const ProbeLabel& a, const ProbeLabel& b, double tol) {
    if (a.index() != b.index()) return false;
    if (const auto* ea = std::get_if<Epr>(&a))
        return std::abs(ea->shift - std::get<Epr>(b).shift) <= tol;
    if (const auto* ca = std::get_if<Collapsed>(&a)) {
        const auto& cb = std::get<Collapsed>(b);
        return std::abs(ca->shift - cb.shift) <= tol && std::abs(ca->pi2 - cb.pi2) <= tol;
    }
    return true;  // both consumed
}

double overlap(const ProbeLabel& a, const ProbeLabel& b, double tol) {
    return labels_equal(a, b, tol) ? 1.0 : 0.0;
}

void ProbeRegister::add(const std::string& pair_id, Axis axis, const std::string& group) {
    if (pairs.count(pair_id)) throw ValidationError("duplicate probe pair id '" + pair_id + "'");
    for (const auto& [id, entry] : pairs) {
        if (entry.group == group && entry.axis == axis)
            throw ValidationError("axis " + std::string(to_string(axis)) +
                                  " already has a probe pair in group '" + group + "'");
    }
    pairs.emplace(pair_id, Entry{axis, group});
}

Axis ProbeRegister::axis_of(const std::string& pair_id) const {
    auto it = pairs.find(pair_id);
    if (it == pairs.end()) throw ValidationError("unknown probe pair id '" + pair_id + "'");
    return it->second.axis;
}

}  // namespace minkqm::probe
