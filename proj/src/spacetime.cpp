#include "minkqm/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace minkqm::spacetime {

double minkowski_dot(const Event& a, const Event& b) {
    return a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z;
}

double interval(const Event& a, const Event& b) {
    const Event d = a - b;
    return minkowski_dot(d, d);
}

double coordinate_scale(const Event& a, const Event& b) {
    double s = 0.0;
    for (double c : {a.t, a.x, a.y, a.z, b.t, b.x, b.y, b.z}) s = std::max(s, std::abs(c));
    return s;
}

double lightcone_tolerance(const Event& a, const Event& b) {
    const double scale = coordinate_scale(a, b);
    return 1e-9 * scale * scale;
}

CausalClass classify(const Event& a, const Event& b) {
    const double s = interval(a, b);
    if (std::abs(s) <= lightcone_tolerance(a, b)) return CausalClass::lightlike;
    return s > 0.0 ? CausalClass::timelike : CausalClass::spacelike;
}

bool in_future(const Event& x, const Event& y) {
    return interval(x, y) > 0.0 && y.t > x.t;
}

bool in_past(const Event& x, const Event& y) { return in_future(y, x); }

Event boost(const Event& e, double rapidity, const std::array<double, 3>& axis) {
    const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    if (std::abs(n - 1.0) > 1e-9) throw NotUnit("boost axis must be a spatial unit vector");
    const double par = (e.x * axis[0] + e.y * axis[1] + e.z * axis[2]) / n;
    const double ch = std::cosh(rapidity);
    const double sh = std::sinh(rapidity);
    const double tp = e.t * ch - par * sh;
    const double pp = par * ch - e.t * sh;
    return {tp,
            e.x + (pp - par) * axis[0] / n,
            e.y + (pp - par) * axis[1] / n,
            e.z + (pp - par) * axis[2] / n};
}

Hyperplane::Hyperplane(const Event& n, double tau) : normal(n), offset(tau) {
    if (std::abs(minkowski_dot(n, n) - 1.0) > 1e-12)
        throw NotUnit("hyperplane normal must be a unit timelike vector");
    if (n.t <= 0.0) throw NotUnit("hyperplane normal must be future directed");
}

void validate(const EventOrder& f) {
    for (std::size_t i = 0; i < f.order.size(); ++i) {
        for (std::size_t j = i + 1; j < f.order.size(); ++j) {
            // if order[j] precedes order[i] causally, the listed order is wrong
            if (in_future(f.order[j], f.order[i]))
                throw InconsistentOrder("event order violates light-cone order");
        }
    }
}

namespace {

std::size_t registered_index(const EventOrder& f, const Event& e) {
    for (std::size_t i = 0; i < f.order.size(); ++i) {
        const Event d = f.order[i] - e;
        const double scale = std::max(1.0, coordinate_scale(f.order[i], e));
        if (std::abs(d.t) + std::abs(d.x) + std::abs(d.y) + std::abs(d.z) <= 1e-12 * scale)
            return i;
    }
    throw InconsistentOrder("event not registered in the foliation's order");
}

}  // namespace

SweepResult sweep_order(const Foliation& f, const std::vector<Event>& events) {
    SweepResult result;
    result.order.resize(events.size());
    std::iota(result.order.begin(), result.order.end(), std::size_t{0});
    result.tied_with_previous.assign(events.size(), false);

    if (const auto* flat = std::get_if<FlatFamily>(&f)) {
        std::vector<double> height(events.size());
        double scale = 1.0;
        for (std::size_t i = 0; i < events.size(); ++i) {
            height[i] = minkowski_dot(flat->normal, events[i]);
            scale = std::max(scale, std::abs(height[i]));
        }
        std::stable_sort(result.order.begin(), result.order.end(),
                         [&](std::size_t a, std::size_t b) { return height[a] < height[b]; });
        const double tie_tol = 1e-12 * scale;
        for (std::size_t k = 1; k < result.order.size(); ++k) {
            if (std::abs(height[result.order[k]] - height[result.order[k - 1]]) <= tie_tol)
                result.tied_with_previous[k] = true;
        }
        return result;
    }

    const auto& reg = std::get<EventOrder>(f);
    validate(reg);
    std::vector<std::size_t> rank(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) rank[i] = registered_index(reg, events[i]);
    std::stable_sort(result.order.begin(), result.order.end(),
                     [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
    for (std::size_t k = 1; k < result.order.size(); ++k) {
        if (rank[result.order[k]] == rank[result.order[k - 1]])
            result.tied_with_previous[k] = true;
    }
    return result;
}

bool Hyperboloid::contains(const Event& e) const {
    const double s = interval(e, vertex);
    const double scale = std::max(tau * tau, lightcone_tolerance(e, vertex) * 1e9);
    if (std::abs(s - tau * tau) > 1e-9 * scale) return false;
    return e.t > vertex.t;
}

double Hyperboloid::rapidity_of(const Event& e) const {
    if (!contains(e)) throw OffSurface("point does not lie on the hyperboloid");
    return std::asinh((e.x - vertex.x) / tau);
}

double hyperboloid_arc_distance(const Hyperboloid& h, const Event& a, const Event& b) {
    return h.tau * std::abs(h.rapidity_of(a) - h.rapidity_of(b));
}

}  // namespace minkqm::spacetime
