#pragma once

#include <vector>

#include "sqdyn/errors.hpp"

namespace sqdyn {

// One-dimensional piecewise-linear homeomorphisms of J = [-1,1] fixing the
// endpoints, plus the canonical upward drift map and its ladder arithmetic.

struct PLHomeo1D {
    std::vector<double> breakpoints;  // strictly increasing, -1 .. 1
    std::vector<double> values;       // strictly increasing, -1 .. 1

    PLHomeo1D() : breakpoints{-1.0, 1.0}, values{-1.0, 1.0} {}
    PLHomeo1D(std::vector<double> brk, std::vector<double> val);

    static PLHomeo1D identity() { return PLHomeo1D(); }

    double eval(double x) const;
    double eval_inverse(double y) const;
    PLHomeo1D inverse() const;
    bool is_identity() const;
};

// Canonical vertical drift on J: three linear branches
//   s in [0, 1]      -> (s+1)/2
//   s in [-1/2, 0]   -> s + 1/2
//   s in [-1, -1/2]  -> 2s + 1
// evaluated by exact branch selection, never by interpolation tables.
double drift_eval(double s);
double drift_eval_inverse(double y);

// the same map as a PLHomeo1D (breakpoints -1, -1/2, 0, 1)
PLHomeo1D drift_as_pl();

// k-fold composition; negative k composes the inverse
double pl_iterate(const PLHomeo1D& h, double s, long long k);
double drift_iterate(double s, long long k);

// Ladder coordinate: a change of variable in which the drift acts as a unit
// translation.  Upper region (s in [0,1)): t = -log2(1-s).  Lower region
// (s in (-1,0]): t = -log2(1+s), increasing by 1 per inverse-drift step.
struct LadderCoordinate {
    double t = 0.0;
    bool upper = true;  // upper: s in [0,1); lower: s in (-1,0]
};

LadderCoordinate to_ladder_coordinate(double s);

// Global fiber-time coordinate: the exact conjugacy of the drift map to the
// unit translation on R.  theta(s) = -log2(1-s) for s in [0,1) and extends
// below 0 by theta(drift(s)) = theta(s) + 1.  Strictly increasing bijection
// (-1,1) -> R.
double fiber_time(double s);
double fiber_time_inverse(double theta);

// {drift^k(x) : x in seed, k in [k_lo, k_hi]}, sorted and deduplicated.
// Seed points must lie in (0, 1/2].
std::vector<double> ladder_closure(const std::vector<double>& seed, long long k_lo, long long k_hi);

}  // namespace sqdyn
