#pragma once

#include <array>
#include <cstddef>
#include <variant>
#include <vector>

#include "minkqm/errors.hpp"

namespace minkqm::spacetime {

/// Point of Minkowski space-time, signature (+,-,-,-), natural units c = 1.
/// Also used for 4-vectors (differences of events, surface normals).
struct Event {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Event operator-(const Event& a, const Event& b) {
        return {a.t - b.t, a.x - b.x, a.y - b.y, a.z - b.z};
    }
    friend Event operator+(const Event& a, const Event& b) {
        return {a.t + b.t, a.x + b.x, a.y + b.y, a.z + b.z};
    }
    friend Event operator*(double s, const Event& a) {
        return {s * a.t, s * a.x, s * a.y, s * a.z};
    }
    friend bool operator==(const Event& a, const Event& b) {
        return a.t == b.t && a.x == b.x && a.y == b.y && a.z == b.z;
    }
};

enum class CausalClass { spacelike, timelike, lightlike };

double minkowski_dot(const Event& a, const Event& b);

/// (a-b)_mu (a-b)^mu.
double interval(const Event& a, const Event& b);

/// Largest coordinate magnitude of the two events, used for tolerance scaling.
double coordinate_scale(const Event& a, const Event& b);

/// Tolerance band around the light cone: |interval| <= 1e-9 * scale^2.
double lightcone_tolerance(const Event& a, const Event& b);

CausalClass classify(const Event& a, const Event& b);

/// y lies in the interior of the forward light-cone of x.
bool in_future(const Event& x, const Event& y);
bool in_past(const Event& x, const Event& y);

/// Active boost by `rapidity` along the spatial unit vector `axis`.
Event boost(const Event& e, double rapidity, const std::array<double, 3>& axis = {1.0, 0.0, 0.0});

/// Space-like plane {x : n.x = offset} with future-directed timelike unit
/// normal n.
struct Hyperplane {
    Event normal;
    double offset = 0.0;

    Hyperplane(const Event& n, double tau);

    /// Signed Minkowski height of e above the plane.
    double height(const Event& e) const { return minkowski_dot(normal, e) - offset; }
    /// Strict past side; events exactly on the plane count as not yet crossed.
    bool strictly_past(const Event& e) const { return height(e) < 0.0; }
};

/// Foliation as a family of parallel flat leaves. `offsets`, when given, list
/// specific leaves in sweep order; for event ordering only the normal matters.
struct FlatFamily {
    Event normal{1.0, 0.0, 0.0, 0.0};
    std::vector<double> offsets;
};

/// Foliation recorded only through the crossing order it induces on a finite
/// set of registered events. Curved leaves are never represented
/// geometrically; the order is all that enters the dynamics.
struct EventOrder {
    std::vector<Event> order;
};

using Foliation = std::variant<FlatFamily, EventOrder>;

/// Throws InconsistentOrder unless the stored order respects the light-cone
/// partial order on the registered events.
void validate(const EventOrder& f);

struct SweepResult {
    std::vector<std::size_t> order;        // indices into the input list
    std::vector<bool> tied_with_previous;  // same leaf as its predecessor
};

/// Events in leaf-crossing order. Flat families sort by n.x (ties keep input
/// order and are flagged); event orders return the registered order.
SweepResult sweep_order(const Foliation& f, const std::vector<Event>& events);

/// Future hyperboloid of constant proper time `tau` about `vertex` (1+1D use).
struct Hyperboloid {
    Event vertex;
    double tau = 1.0;

    bool contains(const Event& e) const;
    /// Rapidity coordinate of a point on the hyperboloid relative to the
    /// vertex frame. Throws OffSurface.
    double rapidity_of(const Event& e) const;
};

/// Riemannian distance along the hyperboloid between two of its points,
/// tau * |chi_a - chi_b| in 1+1D.
double hyperboloid_arc_distance(const Hyperboloid& h, const Event& a, const Event& b);

}  // namespace minkqm::spacetime
