#include "sqdyn/map_algebra.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "sqdyn/interval_maps.hpp"

namespace sqdyn {

nlohmann::json MapNode::describe() const {
    return nlohmann::json{{"kind", kind()}};
}

PlanarPoint MapNode::apply_power(const PlanarPoint& x, long long k) const {
    PlanarPoint p = x;
    if (k >= 0) {
        for (long long i = 0; i < k; ++i) p = forward(p);
    } else {
        for (long long i = 0; i < -k; ++i) p = inverse(p);
    }
    return p;
}

void MapNode::orbit_into(const PlanarPoint& x, long long n0, long long n1, OrbitTrace& out) const {
    out.base = x;
    out.n0 = n0;
    out.n1 = n1;
    out.forward_direction = n1 >= 0;
    out.points.clear();
    out.fiber_times.clear();
    out.points.reserve(static_cast<std::size_t>(n1 - n0 + 1));
    PlanarPoint p = apply_power(x, n0);
    out.points.push_back(p);
    for (long long k = n0; k < n1; ++k) {
        p = forward(p);
        out.points.push_back(p);
    }
}

PlanarPoint MapExpr::forward(const PlanarPoint& x) const { return node->forward(x); }
PlanarPoint MapExpr::inverse(const PlanarPoint& y) const { return node->inverse(y); }
PlanarPoint MapExpr::power(const PlanarPoint& x, long long k) const { return node->apply_power(x, k); }

nlohmann::json MapExpr::to_json() const { return node ? node->describe() : nlohmann::json(nullptr); }

// --- concrete nodes ----------------------------------------------------------

namespace {

class IdentityNode final : public MapNode {
public:
    PlanarPoint forward(const PlanarPoint& x) const override {
        require_in_square(x, "identity");
        return x;
    }
    PlanarPoint inverse(const PlanarPoint& y) const override {
        require_in_square(y, "identity");
        return y;
    }
    std::string kind() const override { return "identity"; }
    std::optional<double> claimed_bilipschitz() const override { return 1.0; }
};

class VerticalDriftNode final : public MapNode {
public:
    PlanarPoint forward(const PlanarPoint& x) const override {
        require_in_square(x, "vertical_drift");
        return {x.r, drift_eval(x.s)};
    }
    PlanarPoint inverse(const PlanarPoint& y) const override {
        require_in_square(y, "vertical_drift");
        return {y.r, drift_eval_inverse(y.s)};
    }
    std::string kind() const override { return "vertical_drift"; }
    std::optional<double> claimed_bilipschitz() const override { return 2.0; }
};

constexpr double kAnnulusInner = 0.5;
constexpr double kAnnulusOuter = 1.0;
constexpr double kAnnulusTol = 1e-12;

class AnnulusRotationNode final : public MapNode {
public:
    static double radius_of(const PlanarPoint& p) { return std::hypot(p.r, p.s); }

    static void require_in_annulus(const PlanarPoint& p) {
        const double rho = radius_of(p);
        if (rho < kAnnulusInner - kAnnulusTol || rho > kAnnulusOuter + kAnnulusTol) {
            std::ostringstream os;
            os << "annulus_rotation: |x| = " << rho << " outside [" << kAnnulusInner << ", "
               << kAnnulusOuter << "]";
            throw DomainError(os.str());
        }
    }

    PlanarPoint forward(const PlanarPoint& x) const override { return rotate(x, +1.0); }
    PlanarPoint inverse(const PlanarPoint& y) const override { return rotate(y, -1.0); }
    std::string kind() const override { return "annulus_rotation"; }
    bool preserves_boundary() const override { return false; }
    bool in_domain(const PlanarPoint& p) const override {
        const double rho = radius_of(p);
        return rho >= kAnnulusInner && rho <= kAnnulusOuter;
    }

private:
    static PlanarPoint rotate(const PlanarPoint& p, double sign) {
        require_in_annulus(p);
        const double rho = radius_of(p);
        // annulus height coordinate in [0,1]; the twist angle equals the height
        const double y = 2.0 * rho - 1.0;
        const double ang = sign * 2.0 * M_PI * y;
        const double c = std::cos(ang), s = std::sin(ang);
        return {p.r * c - p.s * s, p.r * s + p.s * c};
    }
};

class InverseNode final : public MapNode {
public:
    explicit InverseNode(MapPtr child) : child_(std::move(child)) {}
    PlanarPoint forward(const PlanarPoint& x) const override { return child_->inverse(x); }
    PlanarPoint inverse(const PlanarPoint& y) const override { return child_->forward(y); }
    std::string kind() const override { return "inverse"; }
    nlohmann::json describe() const override {
        return {{"kind", kind()}, {"child", child_->describe()}};
    }
    bool is_homeomorphism() const override { return child_->is_homeomorphism(); }
    bool preserves_boundary() const override { return child_->preserves_boundary(); }
    bool in_domain(const PlanarPoint& p) const override { return child_->in_domain(p); }
    std::optional<double> claimed_bilipschitz() const override { return child_->claimed_bilipschitz(); }
    bool fixes_exceptional(const PlanarPoint& p) const override { return child_->fixes_exceptional(p); }
    PlanarPoint apply_power(const PlanarPoint& x, long long k) const override {
        return child_->apply_power(x, -k);
    }
    void orbit_into(const PlanarPoint& x, long long n0, long long n1, OrbitTrace& out) const override {
        OrbitTrace inner;
        child_->orbit_into(x, -n1, -n0, inner);
        out.base = x;
        out.n0 = n0;
        out.n1 = n1;
        out.forward_direction = n1 >= 0;
        out.points.assign(inner.points.rbegin(), inner.points.rend());
        out.fiber_times.assign(inner.fiber_times.rbegin(), inner.fiber_times.rend());
    }
    const MapPtr& child() const { return child_; }

private:
    MapPtr child_;
};

class ComposeNode final : public MapNode {
public:
    explicit ComposeNode(std::vector<MapPtr> children) : children_(std::move(children)) {}

    // children applied right-to-left: forward = c[0] o c[1] o ... o c[n-1]
    PlanarPoint forward(const PlanarPoint& x) const override {
        PlanarPoint p = x;
        for (auto it = children_.rbegin(); it != children_.rend(); ++it) p = (*it)->forward(p);
        return p;
    }
    PlanarPoint inverse(const PlanarPoint& y) const override {
        PlanarPoint p = y;
        for (const auto& c : children_) p = c->inverse(p);
        return p;
    }
    std::string kind() const override { return "compose"; }
    nlohmann::json describe() const override {
        nlohmann::json kids = nlohmann::json::array();
        for (const auto& c : children_) kids.push_back(c->describe());
        return {{"kind", kind()}, {"children", kids}};
    }
    bool is_homeomorphism() const override {
        for (const auto& c : children_)
            if (!c->is_homeomorphism()) return false;
        return true;
    }
    bool preserves_boundary() const override {
        for (const auto& c : children_)
            if (!c->preserves_boundary()) return false;
        return true;
    }
    std::optional<double> claimed_bilipschitz() const override {
        double prod = 1.0;
        for (const auto& c : children_) {
            const auto b = c->claimed_bilipschitz();
            if (!b) return std::nullopt;
            prod *= *b;
        }
        return prod;
    }
    const std::vector<MapPtr>& children() const { return children_; }

private:
    std::vector<MapPtr> children_;
};

class PowerNode final : public MapNode {
public:
    PowerNode(MapPtr child, long long k) : child_(std::move(child)), k_(k) {}
    PlanarPoint forward(const PlanarPoint& x) const override { return child_->apply_power(x, k_); }
    PlanarPoint inverse(const PlanarPoint& y) const override { return child_->apply_power(y, -k_); }
    std::string kind() const override { return "power"; }
    nlohmann::json describe() const override {
        return {{"kind", kind()}, {"exponent", k_}, {"child", child_->describe()}};
    }
    bool is_homeomorphism() const override { return child_->is_homeomorphism(); }
    bool preserves_boundary() const override { return child_->preserves_boundary(); }
    bool fixes_exceptional(const PlanarPoint& p) const override { return child_->fixes_exceptional(p); }
    PlanarPoint apply_power(const PlanarPoint& x, long long k) const override {
        return child_->apply_power(x, k * k_);
    }

private:
    MapPtr child_;
    long long k_;
};

class ConjugateNode final : public MapNode {
public:
    ConjugateNode(MapPtr xi, MapPtr phi) : xi_(std::move(xi)), phi_(std::move(phi)) {}

    PlanarPoint forward(const PlanarPoint& x) const override { return step(x, +1); }
    PlanarPoint inverse(const PlanarPoint& y) const override { return step(y, -1); }
    std::string kind() const override { return "conjugate"; }
    nlohmann::json describe() const override {
        return {{"kind", kind()}, {"xi", xi_->describe()}, {"phi", phi_->describe()}};
    }
    bool preserves_boundary() const override { return phi_->preserves_boundary(); }
    bool fixes_exceptional(const PlanarPoint& p) const override { return xi_->fixes_exceptional(p); }

    // psi^n = xi o phi^n o xi^{-1}: one xi round trip per power, never nested
    PlanarPoint apply_power(const PlanarPoint& x, long long k) const override { return step(x, k); }

    void orbit_into(const PlanarPoint& x, long long n0, long long n1, OrbitTrace& out) const override {
        out.base = x;
        out.n0 = n0;
        out.n1 = n1;
        out.forward_direction = n1 >= 0;
        out.points.clear();
        out.fiber_times.clear();
        if (xi_->fixes_exceptional(x)) {
            out.points.assign(static_cast<std::size_t>(n1 - n0 + 1), x);
            return;
        }
        OrbitTrace inner;
        phi_->orbit_into(xi_->inverse(x), n0, n1, inner);
        out.points.reserve(inner.points.size());
        for (const auto& p : inner.points) out.points.push_back(xi_->forward(p));
        out.fiber_times = std::move(inner.fiber_times);
    }

private:
    PlanarPoint step(const PlanarPoint& x, long long k) const {
        if (xi_->fixes_exceptional(x)) return x;
        return xi_->forward(phi_->apply_power(xi_->inverse(x), k));
    }

    MapPtr xi_;
    MapPtr phi_;
};

}  // namespace

MapExpr identity_map() { return MapExpr(std::make_shared<IdentityNode>()); }
MapExpr vertical_drift_map() { return MapExpr(std::make_shared<VerticalDriftNode>()); }
MapExpr annulus_rotation_map() { return MapExpr(std::make_shared<AnnulusRotationNode>()); }

MapExpr compose(std::vector<MapExpr> maps) {
    if (maps.empty()) return identity_map();
    if (maps.size() == 1) return maps[0];
    std::vector<MapPtr> kids;
    kids.reserve(maps.size());
    for (auto& m : maps) kids.push_back(std::move(m.node));
    return MapExpr(std::make_shared<ComposeNode>(std::move(kids)));
}

MapExpr inverse_of(MapExpr m) { return MapExpr(std::make_shared<InverseNode>(std::move(m.node))); }

MapExpr power_of(MapExpr m, long long k) {
    return MapExpr(std::make_shared<PowerNode>(std::move(m.node), k));
}

MapExpr conjugate(MapExpr xi, MapExpr phi) {
    return MapExpr(std::make_shared<ConjugateNode>(std::move(xi.node), std::move(phi.node)));
}

PlanarPoint eval_forward(const MapExpr& m, const PlanarPoint& x) { return m.forward(x); }
PlanarPoint eval_inverse(const MapExpr& m, const PlanarPoint& y) { return m.inverse(y); }

OrbitTrace orbit(const MapExpr& m, const PlanarPoint& x, long long n0, long long n1) {
    if (n0 > n1) throw InvalidInputError("orbit: n0 > n1");
    OrbitTrace out;
    try {
        m.node->orbit_into(x, n0, n1, out);
    } catch (const Error& e) {
        std::ostringstream os;
        os << "orbit of (" << x.r << ", " << x.s << ") over [" << n0 << ", " << n1
           << "] failed after " << out.points.size() << " recorded steps: " << e.what();
        throw Error(os.str());
    }
    return out;
}

double bilipschitz_estimate(const MapExpr& m, int samples, unsigned long long seed, Exec exec) {
    if (!m.node->is_homeomorphism())
        throw InvalidInputError("bilipschitz_estimate: node is not a homeomorphism");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-0.999, 0.999);

    const auto* node = m.node.get();
    auto draw_point = [&]() {
        for (int tries = 0; tries < 10000; ++tries) {
            PlanarPoint p{coord(rng), coord(rng)};
            if (node->in_domain(p)) return p;
        }
        throw InternalError("bilipschitz_estimate: domain sampling failed");
    };

    // Pair schema per sample: one random partner plus two short axis-aligned
    // partners, which pick up branch-local slopes that random pairs miss.
    const double delta = 1e-4;
    struct Pair {
        PlanarPoint a, b;
        bool ok;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(samples) * 3);
    for (int i = 0; i < samples; ++i) {
        const PlanarPoint p = draw_point();
        const PlanarPoint q = draw_point();
        pairs.push_back({p, q, true});
        PlanarPoint pr{p.r + delta, p.s};
        if (!node->in_domain(pr)) pr = {p.r - delta, p.s};
        pairs.push_back({p, pr, node->in_domain(pr)});
        PlanarPoint ps{p.r, p.s + delta};
        if (!node->in_domain(ps)) ps = {p.r, p.s - delta};
        pairs.push_back({p, ps, node->in_domain(ps)});
    }

    const auto ratios = map_indexed<double>(pairs.size(), exec, [&](std::size_t i) {
        const auto& pr = pairs[i];
        if (!pr.ok) return 1.0;
        const double d0 = euclidean_distance(pr.a, pr.b);
        if (d0 == 0.0) return 1.0;  // coincident pair skipped
        const PlanarPoint fa = node->forward(pr.a);
        const PlanarPoint fb = node->forward(pr.b);
        const double d1 = euclidean_distance(fa, fb);
        if (d1 == 0.0) return std::numeric_limits<double>::infinity();
        return std::max(d1 / d0, d0 / d1);
    });
    double worst = 1.0;
    for (double r : ratios) worst = std::max(worst, r);
    return worst;
}

}  // namespace sqdyn
