#include "sqdyn/interval_maps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sqdyn {

PLHomeo1D::PLHomeo1D(std::vector<double> brk, std::vector<double> val)
    : breakpoints(std::move(brk)), values(std::move(val)) {
    if (breakpoints.size() != values.size() || breakpoints.size() < 2)
        throw InvalidInputError("PLHomeo1D: mismatched or too-short knot sequences");
    if (breakpoints.front() != -1.0 || breakpoints.back() != 1.0 ||
        values.front() != -1.0 || values.back() != 1.0)
        throw InvalidInputError("PLHomeo1D: knots must span [-1,1] and fix the endpoints");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i] < breakpoints[i + 1]) || !(values[i] < values[i + 1]))
            throw InvalidInputError("PLHomeo1D: knot sequences must be strictly increasing");
    }
}

namespace {

double pl_eval(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x < xs.front() - 1e-15 || x > xs.back() + 1e-15)
        throw DomainError("PLHomeo1D: argument outside [-1,1]");
    x = std::clamp(x, xs.front(), xs.back());
    // exact hits at knots return knot values exactly
    const auto it = std::lower_bound(xs.begin(), xs.end(), x);
    if (it != xs.end() && *it == x) return ys[static_cast<std::size_t>(it - xs.begin())];
    std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    if (hi == 0) hi = 1;
    if (hi >= xs.size()) hi = xs.size() - 1;
    const std::size_t lo = hi - 1;
    const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + t * (ys[hi] - ys[lo]);
}

}  // namespace

double PLHomeo1D::eval(double x) const { return pl_eval(breakpoints, values, x); }

double PLHomeo1D::eval_inverse(double y) const { return pl_eval(values, breakpoints, y); }

PLHomeo1D PLHomeo1D::inverse() const { return PLHomeo1D(values, breakpoints); }

bool PLHomeo1D::is_identity() const {
    for (std::size_t i = 0; i < breakpoints.size(); ++i)
        if (breakpoints[i] != values[i]) return false;
    return true;
}

double drift_eval(double s) {
    if (!(s >= -1.0 && s <= 1.0)) {
        std::ostringstream os;
        os << "drift_eval: s = " << s << " outside [-1,1]";
        throw DomainError(os.str());
    }
    if (s >= 0.0) return (s + 1.0) / 2.0;
    if (s >= -0.5) return s + 0.5;
    return 2.0 * s + 1.0;
}

double drift_eval_inverse(double y) {
    if (!(y >= -1.0 && y <= 1.0)) {
        std::ostringstream os;
        os << "drift_eval_inverse: y = " << y << " outside [-1,1]";
        throw DomainError(os.str());
    }
    if (y >= 0.5) return 2.0 * y - 1.0;
    if (y >= 0.0) return y - 0.5;
    return (y - 1.0) / 2.0;
}

PLHomeo1D drift_as_pl() {
    return PLHomeo1D({-1.0, -0.5, 0.0, 1.0}, {-1.0, 0.0, 0.5, 1.0});
}

double pl_iterate(const PLHomeo1D& h, double s, long long k) {
    double x = s;
    if (k >= 0) {
        for (long long i = 0; i < k; ++i) x = h.eval(x);
    } else {
        for (long long i = 0; i < -k; ++i) x = h.eval_inverse(x);
    }
    return x;
}

double drift_iterate(double s, long long k) {
    double x = s;
    if (k >= 0) {
        for (long long i = 0; i < k; ++i) x = drift_eval(x);
    } else {
        for (long long i = 0; i < -k; ++i) x = drift_eval_inverse(x);
    }
    return x;
}

LadderCoordinate to_ladder_coordinate(double s) {
    LadderCoordinate lc;
    if (s >= 0.0) {
        if (s >= 1.0) throw DomainError("to_ladder_coordinate: t infinite at s >= 1");
        lc.upper = true;
        lc.t = -std::log2(1.0 - s);
    } else {
        if (s <= -1.0) throw DomainError("to_ladder_coordinate: t infinite at s <= -1");
        lc.upper = false;
        lc.t = -std::log2(1.0 + s);
    }
    return lc;
}

double fiber_time(double s) {
    if (!(s > -1.0 && s < 1.0)) throw DomainError("fiber_time: s must be interior to (-1,1)");
    if (s >= 0.0) return -std::log2(1.0 - s);
    if (s >= -0.5) {
        // one drift step lands in [0, 1/2)
        return -std::log2(0.5 - s) - 1.0;
    }
    // drift doubles 1+s each step until s reaches [-1/2, 0)
    double x = s;
    long long j = 0;
    while (x < -0.5 && j < 1200) {
        x = 2.0 * x + 1.0;
        ++j;
    }
    return -std::log2(0.5 - x) - 1.0 - static_cast<double>(j);
}

double fiber_time_inverse(double theta) {
    if (theta >= 0.0) {
        const double s = 1.0 - std::exp2(-theta);
        return s;
    }
    // theta < 0: s = drift^{-k}(x) with x = 1 - 2^{-(theta+k)} in [0,1), k = ceil(-theta)
    const double k = std::ceil(-theta);
    const double x = 1.0 - std::exp2(-(theta + k));  // in [0, 1/2) when k = ceil
    // first inverse step: x - 1/2; remaining k-1 steps halve toward -1
    const double z0 = x - 0.5;
    if (k <= 1.0) return z0;
    return (z0 + 1.0) * std::exp2(-(k - 1.0)) - 1.0;
}

std::vector<double> ladder_closure(const std::vector<double>& seed, long long k_lo, long long k_hi) {
    if (k_lo > k_hi) throw InvalidInputError("ladder_closure: empty k range");
    std::vector<double> out;
    for (double x : seed) {
        if (!(x > 0.0 && x <= 0.5)) {
            std::ostringstream os;
            os << "ladder_closure: seed " << x << " outside (0, 1/2]";
            throw InvalidInputError(os.str());
        }
        for (long long k = k_lo; k <= k_hi; ++k) out.push_back(drift_iterate(x, k));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace sqdyn
