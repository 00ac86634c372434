#include "sqdyn/steering.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sqdyn {

PlanarPoint BumpMap::forward(const PlanarPoint& x) const {
    const double d = euclidean_distance(x, center);
    if (d >= radius) return x;
    if (d <= core) {
        // rigid core: exact at x == center
        return {target.r + (x.r - center.r), target.s + (x.s - center.s)};
    }
    const double w = (radius - d) / (radius - core);
    return {x.r + w * (target.r - center.r), x.s + w * (target.s - center.s)};
}

PlanarPoint BumpMap::inverse(const PlanarPoint& w) const {
    const double dw = euclidean_distance(w, center);
    if (dw >= radius) return w;
    const double vr = target.r - center.r;
    const double vs = target.s - center.s;
    const double vv = vr * vr + vs * vs;
    if (vv == 0.0) return w;
    // inner zone candidate
    {
        const PlanarPoint x{w.r - vr, w.s - vs};
        if (euclidean_distance(x, center) <= core) return x;
    }
    // taper zone: x = w - lam*v with lam = (radius - |x-center|)/(radius - core)
    const double ur = w.r - center.r;
    const double us = w.s - center.s;
    const double uu = ur * ur + us * us;
    const double uv = ur * vr + us * vs;
    const double delta = radius - core;
    const double a = delta * delta - vv;
    const double b = 2.0 * (uv - radius * delta);
    const double c = radius * radius - uu;
    double lam = 0.0;
    const double disc = b * b - 4.0 * a * c;
    bool solved = false;
    if (disc >= 0.0 && a > 0.0) {
        lam = (-b - std::sqrt(disc)) / (2.0 * a);
        if (lam >= 0.0 && lam <= 1.0) {
            const double d = radius - lam * delta;
            const double xr = ur - lam * vr;
            const double xs = us - lam * vs;
            if (std::abs(std::hypot(xr, xs) - d) < 1e-9) solved = true;
        }
    }
    if (!solved) {
        // monotone fallback: solve |u - lam(d) v| = d for d in [core, radius]
        double lo = core, hi = radius;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double lm = (radius - mid) / delta;
            const double xr = ur - lm * vr;
            const double xs = us - lm * vs;
            if (std::hypot(xr, xs) > mid)
                lo = mid;
            else
                hi = mid;
        }
        lam = (radius - 0.5 * (lo + hi)) / delta;
    }
    return {w.r - lam * vr, w.s - lam * vs};
}

BumpMap make_bump(const PlanarPoint& z, const PlanarPoint& y, double tau) {
    if (!(tau > 0.0)) throw InvalidInputError("make_bump: radius must be positive");
    const double d = euclidean_distance(z, y);
    if (d >= tau) throw InvalidInputError("invalid-bump: displacement >= radius");
    if (d > kBumpDisplacementCap * tau) {
        std::ostringstream os;
        os << "invalid-bump: displacement " << d << " exceeds the rigid-core profile cap "
           << kBumpDisplacementCap << " * tau (tau = " << tau << ")";
        throw InvalidInputError(os.str());
    }
    BumpMap b;
    b.center = z;
    b.target = y;
    b.radius = tau;
    b.core = tau / 3.0;
    const double x = d / tau;
    b.claimed_bilipschitz = (d == 0.0) ? 1.0 : 1.0 / (1.0 - 1.5 * x);
    return b;
}

namespace {

class BumpNode final : public MapNode {
public:
    explicit BumpNode(BumpMap b) : b_(std::move(b)) {}
    PlanarPoint forward(const PlanarPoint& x) const override { return b_.forward(x); }
    PlanarPoint inverse(const PlanarPoint& y) const override { return b_.inverse(y); }
    std::string kind() const override { return "bump"; }
    nlohmann::json describe() const override {
        return {{"kind", kind()},
                {"center", {b_.center.r, b_.center.s}},
                {"target", {b_.target.r, b_.target.s}},
                {"radius", b_.radius},
                {"core", b_.core}};
    }
    std::optional<double> claimed_bilipschitz() const override { return b_.claimed_bilipschitz; }

private:
    BumpMap b_;
};

}  // namespace

MapExpr bump_expr(BumpMap b) { return MapExpr(std::make_shared<BumpNode>(std::move(b))); }

// --- budget ------------------------------------------------------------------

void SteeringBudget::validate() const {
    if (!(lambda > 1.0)) throw InvalidInputError("steering budget: lambda must exceed 1");
    if (!(eps > 0.0)) throw InvalidInputError("steering budget: eps must be positive");
    if (stages < 0) throw InvalidInputError("steering budget: negative stage count");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw InvalidInputError("steering budget: fraction must be in (0,1)");
}

double SteeringBudget::stage_weight(int j) const {
    double norm = 0.0;
    for (int i = 1; i <= stages; ++i) norm += 1.0 + 1.0 / i;
    if (norm == 0.0) return 0.0;
    return (1.0 + 1.0 / j) / norm;
}

double SteeringBudget::stage_eps(int j) const { return eps * fraction * stage_weight(j); }

double SteeringBudget::stage_lambda(int j) const {
    return std::pow(lambda, fraction * stage_weight(j));
}

double SteeringBudget::running_eps(int k) const {
    double sum = 0.0;
    for (int j = 1; j <= k; ++j) sum += stage_eps(j);
    return sum;
}

double SteeringBudget::running_lambda(int k) const {
    double prod = 1.0;
    for (int j = 1; j <= k; ++j) prod *= stage_lambda(j);
    return prod;
}

// --- enumerations -------------------------------------------------------------

DyadicEnumeration::DyadicEnumeration(int families, unsigned seed_tag)
    : families_(families), tag_(seed_tag) {
    if (families < 1 || families > 15)
        throw InvalidInputError("DyadicEnumeration: supports 1..15 families");
}

double DyadicEnumeration::off_r(int family) const {
    // fixed in-cell offsets keep every point interior and families disjoint
    const double base = 0.41421356237309515;  // sqrt(2) - 1
    return (family + 1 + static_cast<int>(tag_ % 7)) * base / 32.0;
}

double DyadicEnumeration::off_s(int family) const {
    const double base = 0.7320508075688772;  // sqrt(3) - 1
    return (family + 1 + static_cast<int>(tag_ % 5)) * base / 48.0;
}

PlanarPoint DyadicEnumeration::point(int family, long long index) const {
    if (family < 0 || family >= families_) throw InvalidInputError("enumeration: bad family");
    if (index < 0) throw InvalidInputError("enumeration: negative index");
    long long rem = index;
    int level = 0;
    long long level_count = 1;
    while (rem >= level_count * level_count) {
        rem -= level_count * level_count;
        ++level;
        level_count <<= 1;
        if (level > kMaxLevel)
            throw EnumerationDepthError("DyadicEnumeration: index beyond depth cap");
    }
    const long long side = level_count;
    const long long i = rem / side;
    const long long j = rem % side;
    const double c = std::exp2(1 - level);  // cell size 2 / 2^level
    return {-1.0 + (static_cast<double>(j) + 0.5 + off_r(family)) * c,
            -1.0 + (static_cast<double>(i) + 0.5 + off_s(family)) * c};
}

long long DyadicEnumeration::first_within(int family, const PlanarPoint& z, double radius) const {
    if (!(radius > 0.0)) return -1;
    long long level_base = 0;
    long long side = 1;
    for (int level = 0; level <= kMaxLevel; ++level) {
        const double c = std::exp2(1 - level);
        const double wr = off_r(family);
        const double ws = off_s(family);
        const auto cell_range = [&](double zc, double off) {
            const long long lo =
                static_cast<long long>(std::floor((zc - radius + 1.0) / c - 0.5 - off));
            const long long hi =
                static_cast<long long>(std::ceil((zc + radius + 1.0) / c - 0.5 - off));
            return std::pair<long long, long long>{std::max(0LL, lo), std::min(side - 1, hi)};
        };
        const auto [ilo, ihi] = cell_range(z.s, ws);
        const auto [jlo, jhi] = cell_range(z.r, wr);
        for (long long i = ilo; i <= ihi; ++i) {
            for (long long j = jlo; j <= jhi; ++j) {
                const PlanarPoint p{-1.0 + (static_cast<double>(j) + 0.5 + wr) * c,
                                    -1.0 + (static_cast<double>(i) + 0.5 + ws) * c};
                if (euclidean_distance(p, z) < radius) return level_base + i * side + j;
            }
        }
        level_base += side * side;
        side <<= 1;
    }
    return -1;
}

PlanarPoint ExplicitEnumeration::point(int family, long long index) const {
    if (family < 0 || family >= families()) throw InvalidInputError("enumeration: bad family");
    const auto& f = fams_[static_cast<std::size_t>(family)];
    if (index < 0 || index >= static_cast<long long>(f.size()))
        throw EnumerationDepthError("ExplicitEnumeration: index beyond stored prefix");
    return f[static_cast<std::size_t>(index)];
}

long long ExplicitEnumeration::first_within(int family, const PlanarPoint& z, double radius) const {
    const auto& f = fams_[static_cast<std::size_t>(family)];
    for (std::size_t i = 0; i < f.size(); ++i)
        if (euclidean_distance(f[i], z) < radius) return static_cast<long long>(i);
    return -1;
}

// --- construction -------------------------------------------------------------

namespace {

double distance_to_square_boundary(const PlanarPoint& p) {
    return std::min(std::min(1.0 - p.r, p.r + 1.0), std::min(1.0 - p.s, p.s + 1.0));
}

PlanarPoint apply_stages(const std::vector<SteeringStage>& stages, const PlanarPoint& x) {
    PlanarPoint p = x;
    for (const auto& st : stages) p = st.bump.forward(p);
    return p;
}

}  // namespace

SteeringResult build_steering(const PointEnumeration& V, const PointEnumeration& W,
                              const SteeringBudget& budget) {
    budget.validate();
    if (V.families() != W.families())
        throw InvalidInputError("build_steering: V and W family counts differ");
    SteeringResult res;
    res.budget = budget;
    res.residual_bound = budget.residual();
    for (int k = 1; k <= budget.stages; ++k) {
        SteeringStage st;
        const auto [fam, vix] = V.chi(k);
        st.family = fam;
        st.v_index = vix;
        st.source = V.point(fam, vix);
        if (on_square_boundary(st.source) || !in_square(st.source))
            throw InvalidInputError("build_steering: enumerated source point not interior");
        st.pre = apply_stages(res.stages, st.source);
        double tau = distance_to_square_boundary(st.pre);
        for (const auto& prev : res.stages)
            tau = std::min(tau, euclidean_distance(st.pre, prev.target));
        if (!(tau > 0.0)) {
            std::ostringstream os;
            os << "build_steering: stage " << k << " degenerate (tau = 0 at ("
               << st.pre.r << ", " << st.pre.s << "))";
            throw InvalidInputError(os.str());
        }
        st.tau = tau;
        const double le = budget.stage_lambda(k);
        st.bound = std::min({budget.stage_eps(k), (le - 1.0) * tau / le,
                             kBumpDisplacementCap * tau * 0.999});
        st.w_index = W.first_within(fam, st.pre, st.bound);
        if (st.w_index < 0) {
            std::ostringstream os;
            os << "build_steering: stage " << k << " found no family-" << fam
               << " candidate within " << st.bound << " of (" << st.pre.r << ", " << st.pre.s
               << "); enumeration density insufficient at that scale";
            throw EnumerationDepthError(os.str());
        }
        st.target = W.point(fam, st.w_index);
        st.bump = make_bump(st.pre, st.target, tau);
        res.stages.push_back(std::move(st));
    }
    std::vector<MapExpr> parts;
    parts.reserve(res.stages.size());
    for (auto it = res.stages.rbegin(); it != res.stages.rend(); ++it)
        parts.push_back(bump_expr(it->bump));
    res.h = compose(std::move(parts));
    return res;
}

SteeringReport verify_steering(const SteeringResult& result, int grid_n, int bilip_pairs,
                               Exec exec) {
    SteeringReport rep;

    // boundary identity, exact
    const int nb = std::max(grid_n, 8);
    for (int i = 0; i <= nb; ++i) {
        const double t = -1.0 + 2.0 * i / nb;
        for (const PlanarPoint p : {PlanarPoint{t, -1.0}, PlanarPoint{t, 1.0},
                                    PlanarPoint{-1.0, t}, PlanarPoint{1.0, t}}) {
            const PlanarPoint q = result.h.forward(p);
            const double dev = euclidean_distance(p, q);
            rep.boundary_max_dev = std::max(rep.boundary_max_dev, dev);
            if (dev != 0.0) rep.boundary_identity = false;
        }
    }

    // sup displacement over an interior grid
    const auto devs = map_indexed<double>(
        static_cast<std::size_t>(grid_n) * grid_n, exec, [&](std::size_t ix) {
            const int i = static_cast<int>(ix) / grid_n;
            const int j = static_cast<int>(ix) % grid_n;
            const double r = -1.0 + 2.0 * (j + 0.5) / grid_n;
            const double s = -1.0 + 2.0 * (i + 0.5) / grid_n;
            const PlanarPoint p{r, s};
            return euclidean_distance(p, result.h.forward(p));
        });
    for (double d : devs) rep.sup_displacement = std::max(rep.sup_displacement, d);

    // membership: replay h at every steered source and compare with the
    // recorded target (exact by construction)
    for (const auto& st : result.stages) {
        const PlanarPoint img = result.h.forward(st.source);
        const double dev = euclidean_distance(img, st.target);
        rep.membership_max_dev = std::max(rep.membership_max_dev, dev);
        if (dev != 0.0) {
            rep.membership_ok = false;
            ++rep.membership_failures;
        }
    }

    rep.empirical_bilipschitz =
        bilipschitz_estimate(result.h, std::max(1, bilip_pairs / 3), 0xB1D5u, exec);
    return rep;
}

}  // namespace sqdyn
