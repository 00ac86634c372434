#include "sqdyn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

namespace sqdyn {

bool in_square(const PlanarPoint& p) {
    return std::isfinite(p.r) && std::isfinite(p.s) &&
           p.r >= kSquareLo && p.r <= kSquareHi &&
           p.s >= kSquareLo && p.s <= kSquareHi;
}

bool on_square_boundary(const PlanarPoint& p) {
    if (!in_square(p)) return false;
    return std::abs(p.r) == 1.0 || std::abs(p.s) == 1.0;
}

void require_in_square(const PlanarPoint& p, const char* who) {
    if (!in_square(p)) {
        std::ostringstream os;
        os << who << ": point (" << p.r << ", " << p.s << ") outside the square";
        throw DomainError(os.str());
    }
}

double euclidean_distance(const PlanarPoint& a, const PlanarPoint& b) {
    return std::hypot(a.r - b.r, a.s - b.s);
}

double Polyline::length() const {
    double L = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) L += euclidean_distance(pts[i], pts[i + 1]);
    return L;
}

double point_segment_distance(const PlanarPoint& p, const PlanarPoint& a, const PlanarPoint& b) {
    const double vx = b.r - a.r, vy = b.s - a.s;
    const double wx = p.r - a.r, wy = p.s - a.s;
    const double vv = vx * vx + vy * vy;
    if (vv == 0.0) return euclidean_distance(p, a);
    double t = (wx * vx + wy * vy) / vv;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(wx - t * vx, wy - t * vy);
}

double Polyline::distance_to(const PlanarPoint& p) const {
    if (pts.empty()) throw InvalidInputError("Polyline::distance_to: empty polyline");
    if (pts.size() == 1) return euclidean_distance(p, pts[0]);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        best = std::min(best, point_segment_distance(p, pts[i], pts[i + 1]));
    return best;
}

namespace {

int orient_sign(const PlanarPoint& a, const PlanarPoint& b, const PlanarPoint& c, double tol) {
    const double v = (b.r - a.r) * (c.s - a.s) - (b.s - a.s) * (c.r - a.r);
    if (v > tol) return 1;
    if (v < -tol) return -1;
    return 0;
}

bool on_segment_collinear(const PlanarPoint& p, const PlanarPoint& a, const PlanarPoint& b, double tol) {
    return p.r >= std::min(a.r, b.r) - tol && p.r <= std::max(a.r, b.r) + tol &&
           p.s >= std::min(a.s, b.s) - tol && p.s <= std::max(a.s, b.s) + tol;
}

bool same_point(const PlanarPoint& a, const PlanarPoint& b, double tol) {
    return std::abs(a.r - b.r) <= tol && std::abs(a.s - b.s) <= tol;
}

}  // namespace

bool segments_cross(const PlanarPoint& a, const PlanarPoint& b,
                    const PlanarPoint& c, const PlanarPoint& d, double tol) {
    // shared endpoints do not count as a crossing
    const bool share = same_point(a, c, tol) || same_point(a, d, tol) ||
                       same_point(b, c, tol) || same_point(b, d, tol);
    const int o1 = orient_sign(a, b, c, tol);
    const int o2 = orient_sign(a, b, d, tol);
    const int o3 = orient_sign(c, d, a, tol);
    const int o4 = orient_sign(c, d, b, tol);
    if (share) {
        // count only genuine overlap beyond the shared endpoint
        if (o1 == 0 && o2 == 0 && o3 == 0 && o4 == 0) {
            // collinear with a shared endpoint: overlap iff a non-shared endpoint
            // lies strictly inside the other segment
            auto strictly_inside = [&](const PlanarPoint& p, const PlanarPoint& u, const PlanarPoint& v) {
                if (same_point(p, u, tol) || same_point(p, v, tol)) return false;
                return on_segment_collinear(p, u, v, tol);
            };
            return strictly_inside(a, c, d) || strictly_inside(b, c, d) ||
                   strictly_inside(c, a, b) || strictly_inside(d, a, b);
        }
        return false;
    }
    if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
    // endpoint touching interior counts as a crossing for embedding validity
    if (o1 == 0 && on_segment_collinear(c, a, b, tol)) return true;
    if (o2 == 0 && on_segment_collinear(d, a, b, tol)) return true;
    if (o3 == 0 && on_segment_collinear(a, c, d, tol)) return true;
    if (o4 == 0 && on_segment_collinear(b, c, d, tol)) return true;
    return false;
}

void validate_arc(const Polyline& pl) {
    if (pl.pts.size() < 2) throw InvalidInputError("arc: needs at least 2 vertices");
    for (std::size_t i = 0; i + 1 < pl.pts.size(); ++i) {
        if (pl.pts[i] == pl.pts[i + 1])
            throw InvalidInputError("arc: consecutive vertices coincide");
    }
    for (std::size_t i = 0; i + 1 < pl.pts.size(); ++i) {
        for (std::size_t j = i + 1; j + 1 < pl.pts.size(); ++j) {
            if (segments_cross(pl.pts[i], pl.pts[i + 1], pl.pts[j], pl.pts[j + 1]))
                throw InvalidInputError("arc: self-intersection");
        }
    }
}

double PLTree::total_length() const {
    double L = 0.0;
    for (const auto& [u, v] : edges) L += euclidean_distance(vertices[u], vertices[v]);
    return L;
}

double PLTree::distance_to(const PlanarPoint& p) const {
    if (vertices.empty()) throw InvalidInputError("PLTree::distance_to: empty tree");
    double best = std::numeric_limits<double>::infinity();
    if (edges.empty()) {
        for (const auto& v : vertices) best = std::min(best, euclidean_distance(p, v));
        return best;
    }
    for (const auto& [u, v] : edges)
        best = std::min(best, point_segment_distance(p, vertices[u], vertices[v]));
    return best;
}

std::vector<int> PLTree::neighbors(int v) const {
    std::vector<int> out;
    for (const auto& [a, b] : edges) {
        if (a == v) out.push_back(b);
        if (b == v) out.push_back(a);
    }
    return out;
}

std::string TreeDiagnostics::summary() const {
    std::ostringstream os;
    os << "connected=" << (connected ? "yes" : "no")
       << " acyclic=" << (acyclic ? "yes" : "no")
       << " planar=" << (planar_embedding ? "yes" : "no");
    if (!crossing_pairs.empty()) {
        os << " crossings:";
        for (const auto& [i, j] : crossing_pairs) os << " (" << i << "," << j << ")";
    }
    return os.str();
}

TreeDiagnostics validate_tree_embedding(const PLTree& t) {
    TreeDiagnostics d;
    const int n = static_cast<int>(t.vertices.size());
    if (n == 0) {
        d.connected = false;
        return d;
    }
    // connectivity by BFS
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (int w : t.neighbors(v)) {
            if (w >= 0 && w < n && !seen[w]) {
                seen[w] = 1;
                ++reached;
                q.push(w);
            }
        }
    }
    d.connected = (reached == n);
    d.acyclic = (static_cast<int>(t.edges.size()) == n - 1);
    for (std::size_t i = 0; i < t.edges.size(); ++i) {
        for (std::size_t j = i + 1; j < t.edges.size(); ++j) {
            const auto& [a, b] = t.edges[i];
            const auto& [c, e] = t.edges[j];
            if (segments_cross(t.vertices[a], t.vertices[b], t.vertices[c], t.vertices[e])) {
                d.planar_embedding = false;
                d.crossing_pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
        }
    }
    return d;
}

PolygonDisc PolygonDisc::from_vertices(std::vector<PlanarPoint> verts) {
    if (verts.size() < 3) throw InvalidInputError("PolygonDisc: needs >= 3 vertices");
    PolygonDisc d;
    d.boundary.pts = std::move(verts);
    if (!(d.boundary.pts.front() == d.boundary.pts.back()))
        d.boundary.pts.push_back(d.boundary.pts.front());
    if (std::abs(d.area()) <= 0.0)
        throw InvalidInputError("PolygonDisc: zero enclosed area");
    // simplicity check
    const auto& p = d.boundary.pts;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        for (std::size_t j = i + 1; j + 1 < p.size(); ++j) {
            if (segments_cross(p[i], p[i + 1], p[j], p[j + 1]))
                throw InvalidInputError("PolygonDisc: boundary self-intersection");
        }
    }
    return d;
}

double PolygonDisc::area() const {
    const auto& p = boundary.pts;
    double a = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
        a += p[i].r * p[i + 1].s - p[i + 1].r * p[i].s;
    return 0.5 * a;
}

PlanarPoint PolygonDisc::centroid() const {
    const auto& p = boundary.pts;
    double cx = 0.0, cy = 0.0, a = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const double cross = p[i].r * p[i + 1].s - p[i + 1].r * p[i].s;
        a += cross;
        cx += (p[i].r + p[i + 1].r) * cross;
        cy += (p[i].s + p[i + 1].s) * cross;
    }
    a *= 0.5;
    return {cx / (6.0 * a), cy / (6.0 * a)};
}

DiscLocation point_in_disc(const PlanarPoint& x, const PolygonDisc& d, double tol) {
    const auto& p = d.boundary.pts;
    if (p.size() < 4) throw InvalidInputError("point_in_disc: degenerate polygon");
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        if (point_segment_distance(x, p[i], p[i + 1]) <= tol) return DiscLocation::Boundary;
    }
    // crossing-number test with a horizontal ray
    bool inside = false;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const PlanarPoint& a = p[i];
        const PlanarPoint& b = p[i + 1];
        if ((a.s > x.s) != (b.s > x.s)) {
            const double xr = a.r + (x.s - a.s) / (b.s - a.s) * (b.r - a.r);
            if (x.r < xr) inside = !inside;
        }
    }
    return inside ? DiscLocation::Inside : DiscLocation::Outside;
}

bool polygons_disjoint(const PolygonDisc& a, const PolygonDisc& b) {
    const auto& pa = a.boundary.pts;
    const auto& pb = b.boundary.pts;
    for (std::size_t i = 0; i + 1 < pa.size(); ++i)
        for (std::size_t j = 0; j + 1 < pb.size(); ++j)
            if (segments_cross(pa[i], pa[i + 1], pb[j], pb[j + 1], 0.0)) return false;
    // no boundary crossings: disjoint unless one contains the other
    if (point_in_disc(pa[0], b) != DiscLocation::Outside) return false;
    if (point_in_disc(pb[0], a) != DiscLocation::Outside) return false;
    return true;
}

namespace {

double min_dist_to_cloud(const PlanarPoint& p, const PointCloud& c) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : c.pts) {
        const double dr = p.r - q.r, ds = p.s - q.s;
        best = std::min(best, dr * dr + ds * ds);
    }
    return std::sqrt(best);
}

}  // namespace

double directed_hausdorff(const PointCloud& a, const PointCloud& b, Exec exec) {
    if (a.empty() || b.empty()) throw InvalidInputError("directed_hausdorff: empty cloud");
    const auto mins = map_indexed<double>(a.size(), exec,
                                          [&](std::size_t i) { return min_dist_to_cloud(a.pts[i], b); });
    double worst = 0.0;
    for (double m : mins) worst = std::max(worst, m);
    return worst;
}

double hausdorff_distance(const PointCloud& a, const PointCloud& b, Exec exec) {
    return std::max(directed_hausdorff(a, b, exec), directed_hausdorff(b, a, exec));
}

double min_set_distance(const PointCloud& a, const PointCloud& b, Exec exec) {
    if (a.empty() || b.empty()) throw InvalidInputError("min_set_distance: empty cloud");
    const auto mins = map_indexed<double>(a.size(), exec,
                                          [&](std::size_t i) { return min_dist_to_cloud(a.pts[i], b); });
    double best = std::numeric_limits<double>::infinity();
    for (double m : mins) best = std::min(best, m);
    return best;
}

}  // namespace sqdyn
