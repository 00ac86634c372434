#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "sqdyn/geometry.hpp"
#include "sqdyn/map_algebra.hpp"

namespace sqdyn {

// Bump homeomorphisms of the square and the stagewise steering construction:
// a composition h_K of bumps, identity on the boundary, moving enumerated
// points of the V-families onto members of the matching W-families while
// spending explicit bi-Lipschitz and displacement budgets.

struct BumpMap {
    PlanarPoint center;   // z
    PlanarPoint target;   // y = image of z
    double radius = 1.0;  // tau; identity outside the closed ball B(z, tau)
    double core = 1.0;    // inner radius translated rigidly (tau/3)
    double claimed_bilipschitz = 1.0;

    PlanarPoint forward(const PlanarPoint& x) const;
    PlanarPoint inverse(const PlanarPoint& w) const;
    double displacement() const { return euclidean_distance(center, target); }
};

// Displacement fraction of the radius beyond which the rigid-core profile
// stops being injective with comfortable margin.
inline constexpr double kBumpDisplacementCap = 0.45;

BumpMap make_bump(const PlanarPoint& z, const PlanarPoint& y, double tau);
MapExpr bump_expr(BumpMap b);

// Stage budgets: strictly decreasing sequences with finite-stage totals
// below the global budgets.  Stage weights are proportional to (1 + 1/j),
// normalized so that sum(eps_j) = fraction * eps and
// prod(lambda_j) = lambda^fraction.
struct SteeringBudget {
    double lambda = 2.0;
    double eps = 0.2;
    int stages = 64;        // K
    double fraction = 0.98; // spent share of both budgets

    double stage_weight(int j) const;   // 1-based
    double stage_eps(int j) const;
    double stage_lambda(int j) const;
    double running_eps(int k) const;    // delta_k
    double running_lambda(int k) const; // mu_k
    double residual() const { return eps - running_eps(stages); }
    void validate() const;
};

// Deterministic labelled point families, dense in the open square, pairwise
// disjoint across families, with an interleaved global enumeration chi.
class PointEnumeration {
public:
    virtual ~PointEnumeration() = default;
    virtual int families() const = 0;
    virtual PlanarPoint point(int family, long long index) const = 0;
    // index of the first enumerated family point with d(point, z) < radius,
    // or -1 when none exists within the searchable depth
    virtual long long first_within(int family, const PlanarPoint& z, double radius) const = 0;

    // chi: stage k (1-based) -> (family, per-family index), round-robin
    std::pair<int, long long> chi(long long k) const {
        const int m = families();
        return {static_cast<int>((k - 1) % m), (k - 1) / m};
    }
};

// Dyadic stratified enumeration: level L contributes the 4^L cell points of
// the square, ordered level-major then row-major; each family sits at its
// own fixed in-cell offset, which keeps the families pairwise disjoint and
// every point interior.
class DyadicEnumeration final : public PointEnumeration {
public:
    DyadicEnumeration(int families, unsigned seed_tag = 0);
    int families() const override { return families_; }
    PlanarPoint point(int family, long long index) const override;
    long long first_within(int family, const PlanarPoint& z, double radius) const override;

    static constexpr int kMaxLevel = 28;

private:
    double off_r(int family) const;
    double off_s(int family) const;
    int families_;
    unsigned tag_;
};

// Explicit finite prefixes (used by tests and by hand-written examples).
class ExplicitEnumeration final : public PointEnumeration {
public:
    explicit ExplicitEnumeration(std::vector<std::vector<PlanarPoint>> fams)
        : fams_(std::move(fams)) {}
    int families() const override { return static_cast<int>(fams_.size()); }
    PlanarPoint point(int family, long long index) const override;
    long long first_within(int family, const PlanarPoint& z, double radius) const override;

private:
    std::vector<std::vector<PlanarPoint>> fams_;
};

struct SteeringStage {
    int family = 0;
    long long v_index = 0;  // index of x_k within its family
    long long w_index = -1; // index of y_k within its family (-1: custom rule)
    PlanarPoint source;     // x_k
    PlanarPoint pre;        // z_k = h_{k-1}(x_k)
    PlanarPoint target;     // y_k
    double tau = 0.0;
    double bound = 0.0;
    BumpMap bump;
};

struct SteeringResult {
    MapExpr h;                      // the composition h_K
    std::vector<SteeringStage> stages;
    SteeringBudget budget;
    double residual_bound = 0.0;

    PlanarPoint eval(const PlanarPoint& x) const { return h.forward(x); }
};

// Lemma-style construction: stage k moves h_{k-1}(x_k) onto the first
// W-family candidate inside min{eps_k, (lambda_k - 1) tau_k / lambda_k}.
SteeringResult build_steering(const PointEnumeration& V, const PointEnumeration& W,
                              const SteeringBudget& budget);

struct SteeringReport {
    bool boundary_identity = true;
    double boundary_max_dev = 0.0;
    double sup_displacement = 0.0;
    bool membership_ok = true;
    double membership_max_dev = 0.0;
    int membership_failures = 0;
    double empirical_bilipschitz = 1.0;
    bool pass(double lambda, double eps) const {
        return boundary_identity && membership_ok && sup_displacement < eps &&
               empirical_bilipschitz < lambda;
    }
};

SteeringReport verify_steering(const SteeringResult& result, int grid_n = 100,
                               int bilip_pairs = 10000, Exec exec = Exec::Serial);

}  // namespace sqdyn
