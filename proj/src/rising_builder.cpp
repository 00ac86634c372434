#include "sqdyn/rising_builder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace sqdyn {

void validate_rising_spec(const RisingSpec& spec) {
    if (!(spec.contraction > 0.0 && spec.contraction < 1.0))
        throw InvalidInputError("rising spec: contraction must be in (0,1)");
    if (!(spec.decay_power > 0.0 && spec.decay_power < 1.0))
        throw InvalidInputError("rising spec: decay_power must be in (0,1)");
    struct Tagged {
        Segment1D seg;
        std::size_t entry;
    };
    std::vector<Tagged> all;
    for (std::size_t n = 0; n < spec.entries.size(); ++n) {
        const auto& e = spec.entries[n];
        if (e.bands.empty())
            throw InvalidInputError("rising spec: entry without bands");
        for (const auto& b : e.bands) {
            if (!(b.lo > 0.0 && b.hi <= 0.5)) {
                std::ostringstream os;
                os << "rising spec: band [" << b.lo << ", " << b.hi << "] outside (0, 1/2]";
                throw InvalidInputError(os.str());
            }
            all.push_back({b, n});
        }
        for (const Segment1D* t : {&e.omega_target, &e.alpha_target}) {
            if (t->lo < -1.0 + spec.target_margin || t->hi > 1.0 - spec.target_margin) {
                std::ostringstream os;
                os << "rising spec: target [" << t->lo << ", " << t->hi
                   << "] within margin " << spec.target_margin << " of the square corners";
                throw MarginError(os.str());
            }
        }
    }
    std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.seg.lo < b.seg.lo; });
    for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        const double gap = all[i + 1].seg.lo - all[i].seg.hi;
        if (gap <= 0.0)
            throw InvalidInputError("rising spec: overlapping bands");
        if (all[i].entry != all[i + 1].entry && gap < spec.gap_min) {
            std::ostringstream os;
            os << "rising spec: band gap " << gap << " below gap_min " << spec.gap_min;
            throw InvalidInputError(os.str());
        }
    }
}

double sweep01(long long k) {
    if (k <= 0) return 0.0;
    if (k == 1) return 1.0;
    const int p = 63 - std::countl_zero(static_cast<unsigned long long>(k));
    const long long i = k - (1LL << p);
    const double step = std::exp2(-p);
    const double v = static_cast<double>(i + 1) * step;
    return (p % 2 == 1) ? 1.0 - v : v;
}

double sweep_program(const Segment1D& target, long long k) {
    return target.lo + (target.hi - target.lo) * sweep01(k);
}

namespace {

// PL interpolation of the sweep between consecutive integer times
double sweep_interp(double t) {
    const double fl = std::floor(t);
    const long long j = static_cast<long long>(fl);
    const double frac = t - fl;
    const double w0 = sweep01(j);
    if (frac == 0.0) return w0;
    const double w1 = sweep01(j + 1);
    return w0 + frac * (w1 - w0);
}

double blend_ramp(double theta) {
    // 0 below -1/2, 1 above 1/2
    if (theta >= 0.5) return 1.0;
    if (theta <= -0.5) return 0.0;
    return theta + 0.5;
}

}  // namespace

FiberedRisingMap::FiberedRisingMap(RisingSpec spec) : spec_(std::move(spec)) {
    validate_rising_spec(spec_);
    if (spec_.entries.empty()) {
        degenerate_ = true;
        return;
    }
    for (const auto& e : spec_.entries) {
        for (const auto& b : e.bands) {
            const double tlo = fiber_time(b.lo);
            const double thi = b.hi == 0.5 ? 1.0 : fiber_time(b.hi);
            omega_nodes_.push_back({tlo, e.omega_target.lo, e.omega_target.length()});
            omega_nodes_.push_back({thi, e.omega_target.lo, e.omega_target.length()});
            alpha_nodes_.push_back({tlo, e.alpha_target.lo, e.alpha_target.length()});
            alpha_nodes_.push_back({thi, e.alpha_target.lo, e.alpha_target.length()});
        }
    }
    auto by_pos = [](const FieldNode& a, const FieldNode& b) { return a.pos < b.pos; };
    std::sort(omega_nodes_.begin(), omega_nodes_.end(), by_pos);
    std::sort(alpha_nodes_.begin(), alpha_nodes_.end(), by_pos);
    modulus_ = estimate_modulus();
}

double FiberedRisingMap::eval_field(const std::vector<FieldNode>& nodes, double phase, bool len) const {
    // circular PL interpolation over phase in (0, 1]
    const auto val = [&](const FieldNode& n) { return len ? n.len : n.a; };
    if (nodes.size() == 1) return val(nodes.front());
    // locate bracketing nodes with wraparound
    if (phase <= nodes.front().pos) {
        const FieldNode& lo = nodes.back();
        const FieldNode& hi = nodes.front();
        const double span = hi.pos + 1.0 - lo.pos;
        if (span == 0.0) return val(hi);
        const double t = (phase + 1.0 - lo.pos) / span;
        return val(lo) + t * (val(hi) - val(lo));
    }
    if (phase >= nodes.back().pos) {
        const FieldNode& lo = nodes.back();
        const FieldNode& hi = nodes.front();
        const double span = hi.pos + 1.0 - lo.pos;
        if (span == 0.0) return val(lo);
        const double t = (phase - lo.pos) / span;
        return val(lo) + t * (val(hi) - val(lo));
    }
    std::size_t hi_ix = 1;
    while (hi_ix < nodes.size() && nodes[hi_ix].pos < phase) ++hi_ix;
    const FieldNode& lo = nodes[hi_ix - 1];
    const FieldNode& hi = nodes[hi_ix];
    const double span = hi.pos - lo.pos;
    if (span == 0.0) return val(hi);
    const double t = (phase - lo.pos) / span;
    return val(lo) + t * (val(hi) - val(lo));
}

double FiberedRisingMap::field_a(const std::vector<FieldNode>& nodes, double phase) const {
    return eval_field(nodes, phase, false);
}

double FiberedRisingMap::field_len(const std::vector<FieldNode>& nodes, double phase) const {
    return eval_field(nodes, phase, true);
}

double FiberedRisingMap::track_omega(double theta) const {
    double phase = theta - std::floor(theta);
    if (phase == 0.0) phase = 1.0;
    return field_a(omega_nodes_, phase) + field_len(omega_nodes_, phase) * sweep_interp(theta);
}

double FiberedRisingMap::track_alpha(double theta) const {
    double phase = theta - std::floor(theta);
    if (phase == 0.0) phase = 1.0;
    return field_a(alpha_nodes_, phase) + field_len(alpha_nodes_, phase) * sweep_interp(-theta);
}

double FiberedRisingMap::track_position(double theta) const {
    const double chi = blend_ramp(theta);
    if (chi >= 1.0) return track_omega(theta);
    if (chi <= 0.0) return track_alpha(theta);
    return chi * track_omega(theta) + (1.0 - chi) * track_alpha(theta);
}

double FiberedRisingMap::pull_strength(double theta) const {
    const double c = spec_.contraction;
    const double q = spec_.decay_power;
    return c * std::pow(1.0 + std::abs(theta), -q);
}

FiberedRisingMap::Knots FiberedRisingMap::knots_at(double theta) const {
    Knots k;
    k.u = track_position(theta);
    k.v = track_position(theta + 1.0);
    const double c = spec_.contraction;
    const double q = spec_.decay_power;
    const double gup = c * std::pow(1.0 + std::max(theta, 0.0), -q);
    const double gdn = c * std::pow(1.0 + std::max(-theta, 0.0), -q);
    const double chi = blend_ramp(theta);
    const double lnk = chi * std::log1p(-gup) - (1.0 - chi) * std::log1p(-gdn);
    k.kappa = std::exp(lnk);
    k.rm = 0.5 * std::min(1.0 + k.u, (1.0 + k.v) / k.kappa);
    k.rp = 0.5 * std::min(1.0 - k.u, (1.0 - k.v) / k.kappa);
    return k;
}

namespace {

double apply_knots(double u, double v, double rm, double rp, double kappa, double r) {
    // 5-knot PL homeomorphism: (-1,-1), (u-rm, v-kappa*rm), (u, v),
    // (u+rp, v+kappa*rp), (1, 1)
    if (r == -1.0 || r == 1.0) return r;
    if (r == u) return v;
    if (r < u - rm) {
        const double t = (r + 1.0) / (u - rm + 1.0);
        return -1.0 + t * (v - kappa * rm + 1.0);
    }
    if (r < u) {
        const double t = (r - (u - rm)) / rm;
        return (v - kappa * rm) + t * (kappa * rm);
    }
    if (r <= u + rp) {
        const double t = (r - u) / rp;
        return v + t * (kappa * rp);
    }
    const double t = (r - (u + rp)) / (1.0 - (u + rp));
    return (v + kappa * rp) + t * (1.0 - (v + kappa * rp));
}

double apply_knots_inverse(double u, double v, double rm, double rp, double kappa, double y) {
    if (y == -1.0 || y == 1.0) return y;
    if (y == v) return u;
    if (y < v - kappa * rm) {
        const double t = (y + 1.0) / (v - kappa * rm + 1.0);
        return -1.0 + t * (u - rm + 1.0);
    }
    if (y < v) {
        const double t = (y - (v - kappa * rm)) / (kappa * rm);
        return (u - rm) + t * rm;
    }
    if (y <= v + kappa * rp) {
        const double t = (y - v) / (kappa * rp);
        return u + t * rp;
    }
    const double t = (y - (v + kappa * rp)) / (1.0 - (v + kappa * rp));
    return (u + rp) + t * (1.0 - (u + rp));
}

}  // namespace

PLHomeo1D FiberedRisingMap::fiber_map_at_time(double theta) const {
    if (degenerate_) return PLHomeo1D::identity();
    const Knots k = knots_at(theta);
    return PLHomeo1D({-1.0, k.u - k.rm, k.u, k.u + k.rp, 1.0},
                     {-1.0, k.v - k.kappa * k.rm, k.v, k.v + k.kappa * k.rp, 1.0});
}

PLHomeo1D FiberedRisingMap::fiber_map(double s) const {
    if (!(s >= -1.0 && s <= 1.0)) throw DomainError("fiber_map: s outside [-1,1]");
    if (degenerate_ || s == -1.0 || s == 1.0) return PLHomeo1D::identity();
    return fiber_map_at_time(fiber_time(s));
}

PlanarPoint FiberedRisingMap::forward(const PlanarPoint& x) const {
    require_in_square(x, "rising.forward");
    const double s_next = drift_eval(x.s);  // shared exact code path for the ordinate
    if (degenerate_ || x.s == -1.0 || x.s == 1.0 || x.r == -1.0 || x.r == 1.0)
        return {x.r, s_next};
    const Knots k = knots_at(fiber_time(x.s));
    return {apply_knots(k.u, k.v, k.rm, k.rp, k.kappa, x.r), s_next};
}

PlanarPoint FiberedRisingMap::inverse(const PlanarPoint& y) const {
    require_in_square(y, "rising.inverse");
    const double s_prev = drift_eval_inverse(y.s);
    if (degenerate_ || y.s == -1.0 || y.s == 1.0 || y.r == -1.0 || y.r == 1.0)
        return {y.r, s_prev};
    const Knots k = knots_at(fiber_time(s_prev));
    return {apply_knots_inverse(k.u, k.v, k.rm, k.rp, k.kappa, y.r), s_prev};
}

void FiberedRisingMap::step_extended(double& r, double& theta, bool forward_dir) const {
    if (degenerate_) {
        theta += forward_dir ? 1.0 : -1.0;
        return;
    }
    if (r == -1.0 || r == 1.0) {
        theta += forward_dir ? 1.0 : -1.0;
        return;
    }
    if (forward_dir) {
        const Knots k = knots_at(theta);
        r = apply_knots(k.u, k.v, k.rm, k.rp, k.kappa, r);
        theta += 1.0;
    } else {
        const Knots k = knots_at(theta - 1.0);
        r = apply_knots_inverse(k.u, k.v, k.rm, k.rp, k.kappa, r);
        theta -= 1.0;
    }
}

double FiberedRisingMap::estimate_modulus() const {
    // sampled Lipschitz modulus of s -> g_s
    double worst = 0.0;
    const int nt = 160;
    const int nr = 33;
    for (int i = 0; i < nt; ++i) {
        const double s = -0.995 + 1.99 * i / (nt - 1);
        const double s2 = s + 1e-4;
        if (s2 >= 1.0) continue;
        const PLHomeo1D g1 = fiber_map(s);
        const PLHomeo1D g2 = fiber_map(s2);
        for (int j = 1; j + 1 < nr; ++j) {
            const double r = -1.0 + 2.0 * j / (nr - 1);
            worst = std::max(worst, std::abs(g1.eval(r) - g2.eval(r)) / 1e-4);
        }
    }
    return worst;
}

RisingPtr build_rising(const RisingSpec& spec) {
    return std::make_shared<FiberedRisingMap>(spec);
}

namespace {

class RisingNode final : public MapNode {
public:
    explicit RisingNode(RisingPtr map) : map_(std::move(map)) {}

    PlanarPoint forward(const PlanarPoint& x) const override { return map_->forward(x); }
    PlanarPoint inverse(const PlanarPoint& y) const override { return map_->inverse(y); }
    std::string kind() const override { return "fibered_rising"; }
    nlohmann::json describe() const override {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : map_->spec().entries) {
            nlohmann::json bands = nlohmann::json::array();
            for (const auto& b : e.bands) bands.push_back({b.lo, b.hi});
            entries.push_back({{"bands", bands},
                               {"omega_target", {e.omega_target.lo, e.omega_target.hi}},
                               {"alpha_target", {e.alpha_target.lo, e.alpha_target.hi}}});
        }
        return {{"kind", kind()},
                {"entries", entries},
                {"contraction", map_->spec().contraction},
                {"decay_power", map_->spec().decay_power}};
    }

    PlanarPoint apply_power(const PlanarPoint& x, long long k) const override {
        require_in_square(x, "rising.power");
        if (k == 0) return x;
        if (x.s == -1.0 || x.s == 1.0) return x;
        double r = x.r;
        double theta = fiber_time(x.s);
        const bool fwd = k > 0;
        for (long long i = 0; i < std::llabs(k); ++i) map_->step_extended(r, theta, fwd);
        return {r, fiber_time_inverse(theta)};
    }

    void orbit_into(const PlanarPoint& x, long long n0, long long n1, OrbitTrace& out) const override {
        require_in_square(x, "rising.orbit");
        out.base = x;
        out.n0 = n0;
        out.n1 = n1;
        out.forward_direction = n1 >= 0;
        out.points.clear();
        out.fiber_times.clear();
        const std::size_t count = static_cast<std::size_t>(n1 - n0 + 1);
        if (x.s == -1.0 || x.s == 1.0) {
            out.points.assign(count, x);
            return;
        }
        double r = x.r;
        double theta = fiber_time(x.s);
        for (long long i = 0; i < std::llabs(n0); ++i) map_->step_extended(r, theta, n0 > 0);
        out.points.reserve(count);
        out.fiber_times.reserve(count);
        out.points.push_back({r, fiber_time_inverse(theta)});
        out.fiber_times.push_back(theta);
        for (long long k = n0; k < n1; ++k) {
            map_->step_extended(r, theta, true);
            out.points.push_back({r, fiber_time_inverse(theta)});
            out.fiber_times.push_back(theta);
        }
    }

private:
    RisingPtr map_;
};

}  // namespace

MapExpr rising_map_expr(RisingPtr map) {
    return MapExpr(std::make_shared<RisingNode>(std::move(map)));
}

}  // namespace sqdyn
