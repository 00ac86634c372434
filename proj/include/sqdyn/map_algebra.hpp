#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqdyn/geometry.hpp"

namespace sqdyn {

// Invertible planar maps as composable expressions.  Nodes are immutable
// and shared; evaluation is pure, so orbits for distinct base points can be
// computed concurrently without coordination.

class MapNode;
using MapPtr = std::shared_ptr<const MapNode>;

struct OrbitTrace {
    PlanarPoint base;
    long long n0 = 0;
    long long n1 = 0;
    bool forward_direction = true;
    std::vector<PlanarPoint> points;   // m^k(base) for k = n0..n1
    std::vector<double> fiber_times;   // extended fiber state where the core keeps one

    const PlanarPoint& at_step(long long k) const { return points.at(static_cast<std::size_t>(k - n0)); }
    const PlanarPoint& last() const { return points.back(); }
};

class MapNode {
public:
    virtual ~MapNode() = default;

    virtual PlanarPoint forward(const PlanarPoint& x) const = 0;
    virtual PlanarPoint inverse(const PlanarPoint& y) const = 0;
    virtual std::string kind() const = 0;
    virtual nlohmann::json describe() const;

    virtual bool is_homeomorphism() const { return true; }
    // true when the node restricted to the square boundary agrees with the
    // vertical drift (normally rising contract) or fixes it
    virtual bool preserves_boundary() const { return true; }
    virtual std::optional<double> claimed_bilipschitz() const { return std::nullopt; }
    virtual bool in_domain(const PlanarPoint& p) const { return in_square(p); }

    // Conjugation support: points the node fixes by the exceptional-set
    // convention (single-valued inverse fails there, the conjugated map is
    // the identity there).
    virtual bool fixes_exceptional(const PlanarPoint&) const { return false; }

    // k-fold application; negative k applies the inverse.  Overridden where
    // a smarter route exists (conjugations, fibered cores).
    virtual PlanarPoint apply_power(const PlanarPoint& x, long long k) const;

    virtual void orbit_into(const PlanarPoint& x, long long n0, long long n1, OrbitTrace& out) const;
};

struct MapExpr {
    MapPtr node;

    MapExpr() = default;
    explicit MapExpr(MapPtr n) : node(std::move(n)) {}

    PlanarPoint forward(const PlanarPoint& x) const;
    PlanarPoint inverse(const PlanarPoint& y) const;
    PlanarPoint power(const PlanarPoint& x, long long k) const;
    bool valid() const { return node != nullptr; }

    nlohmann::json to_json() const;
};

// --- constructors -----------------------------------------------------------

MapExpr identity_map();
MapExpr vertical_drift_map();   // (r, s) -> (r, drift(s))
// rigid rotation of the embedded annulus {1/2 <= |x| <= 1}, twist by height
MapExpr annulus_rotation_map();
MapExpr compose(std::vector<MapExpr> maps);  // apply right-to-left
MapExpr inverse_of(MapExpr m);
MapExpr power_of(MapExpr m, long long k);
// conjugate(xi, phi) = xi o phi o xi^{-1}, powers routed as xi o phi^n o xi^{-1}
MapExpr conjugate(MapExpr xi, MapExpr phi);

// --- operations --------------------------------------------------------------

PlanarPoint eval_forward(const MapExpr& m, const PlanarPoint& x);
PlanarPoint eval_inverse(const MapExpr& m, const PlanarPoint& y);

OrbitTrace orbit(const MapExpr& m, const PlanarPoint& x, long long n0, long long n1);

// Empirical bi-Lipschitz constant over random sample pairs (uniform pairs
// plus short axis-aligned pairs).  Deterministic given the seed; a lower
// bound on the true constant.
double bilipschitz_estimate(const MapExpr& m, int samples, unsigned long long seed,
                            Exec exec = Exec::Serial);

}  // namespace sqdyn
