#include "sqdyn/permeation.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace sqdyn {

namespace {

PlanarPoint mirror_s(const PlanarPoint& p) { return {p.r, -p.s}; }

PlanarPoint rot_cw(const PlanarPoint& d) { return {d.s, -d.r}; }

PlanarPoint unit(const PlanarPoint& d) {
    const double n = std::hypot(d.r, d.s);
    return {d.r / n, d.s / n};
}

PlanarPoint add(const PlanarPoint& a, const PlanarPoint& b) { return {a.r + b.r, a.s + b.s}; }
PlanarPoint sub(const PlanarPoint& a, const PlanarPoint& b) { return {a.r - b.r, a.s - b.s}; }
PlanarPoint scale(const PlanarPoint& a, double t) { return {a.r * t, a.s * t}; }

double cross2(const PlanarPoint& a, const PlanarPoint& b) { return a.r * b.s - a.s * b.r; }

double signed_area(const std::vector<PlanarPoint>& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        a += p.r * q.s - q.r * p.s;
    }
    return 0.5 * a;
}

}  // namespace

// --- hanging sets and hutches ---------------------------------------------------

bool HangingSet::vertex_is_floating(int v) const {
    return std::find(floating_vertices.begin(), floating_vertices.end(), v) !=
           floating_vertices.end();
}

void HangingSet::validate() const {
    if (edge != 1 && edge != -1) throw InvalidInputError("hanging set: edge must be +1 or -1");
    const auto diag = validate_tree_embedding(tree);
    if (!diag.valid())
        throw InvalidInputError("unsupported-structure: hanging set is not an embedded tree (" +
                                diag.summary() + ")");
    if (base_vertex < 0 || base_vertex >= static_cast<int>(tree.vertices.size()))
        throw InvalidInputError("hanging set: base vertex out of range");
    const double se = static_cast<double>(edge);
    int on_edge = 0;
    for (std::size_t i = 0; i < tree.vertices.size(); ++i) {
        const auto& v = tree.vertices[i];
        if (v.s == se) {
            ++on_edge;
            if (static_cast<int>(i) != base_vertex)
                throw InvalidInputError(
                    "unsupported-structure: only a single base vertex may touch the edge");
            if (std::abs(v.r) >= 1.0)
                throw InvalidInputError("hanging set: base vertex must lie on the open edge");
        } else if (std::abs(v.s) >= 1.0 || std::abs(v.r) >= 1.0) {
            throw InvalidInputError("hanging set: vertices must be interior except the base");
        }
    }
    if (on_edge != 1) throw InvalidInputError("hanging set: base vertex must lie on the edge");
    if (tree.degree(base_vertex) != 1)
        throw InvalidInputError("unsupported-structure: base vertex must have degree 1");
    for (int fv : floating_vertices) {
        if (fv == base_vertex)
            throw InvalidInputError("hanging set: base vertex cannot be floating");
        if (fv < 0 || fv >= static_cast<int>(tree.vertices.size()))
            throw InvalidInputError("hanging set: floating vertex out of range");
    }
}

void Hutch::validate() const {
    hanging.validate();
    if (edge != hanging.edge) throw InvalidInputError("hutch: edge does not match its hanging set");
    const auto& pts = disc.boundary.pts;
    if (pts.size() < 4) throw InvalidInputError("hutch: degenerate polygon");
    int sign = 0;
    const std::size_t n = disc.num_vertices();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % n];
        const auto& c = pts[(i + 2) % n];
        const double cr = cross2(sub(b, a), sub(c, b));
        if (std::abs(cr) < 1e-15) continue;
        const int s = cr > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        else if (s != sign) throw InvalidInputError("hutch: polygon is not convex");
    }
    const auto& bp = hanging.tree.vertices[static_cast<std::size_t>(hanging.base_vertex)];
    if (!(bp.r > base_arc.lo && bp.r < base_arc.hi))
        throw InvalidInputError("hutch: hanging set does not meet the interior of the base arc");
    for (std::size_t i = 0; i < hanging.tree.vertices.size(); ++i) {
        if (static_cast<int>(i) == hanging.base_vertex) continue;
        if (point_in_disc(hanging.tree.vertices[i], disc) != DiscLocation::Inside)
            throw InvalidInputError("hutch: hanging set leaves the open disc");
    }
}

Hutch make_hutch(std::vector<PlanarPoint> polygon, HangingSet hanging) {
    hanging.validate();
    const double se = static_cast<double>(hanging.edge);
    Hutch h;
    h.edge = hanging.edge;
    h.hanging = std::move(hanging);
    std::vector<std::size_t> on_edge;
    for (std::size_t i = 0; i < polygon.size(); ++i)
        if (polygon[i].s == se) on_edge.push_back(i);
    if (on_edge.size() != 2)
        throw InvalidInputError("make_hutch: polygon must have exactly two vertices on the edge");
    const std::size_t n = polygon.size();
    const bool adjacent = (on_edge[1] == on_edge[0] + 1) ||
                          (on_edge[0] == 0 && on_edge[1] == n - 1);
    if (!adjacent) throw InvalidInputError("make_hutch: edge vertices must be adjacent");
    for (const auto& p : polygon) {
        if (!in_square(p)) throw InvalidInputError("make_hutch: polygon leaves the square");
        if (p.s != se && std::abs(p.s) >= 1.0)
            throw InvalidInputError("make_hutch: non-base vertices must avoid the edges");
    }
    const double alo = std::min(polygon[on_edge[0]].r, polygon[on_edge[1]].r);
    const double ahi = std::max(polygon[on_edge[0]].r, polygon[on_edge[1]].r);
    h.base_arc = Segment1D(alo, ahi);
    h.disc = PolygonDisc::from_vertices(std::move(polygon));
    h.validate();
    return h;
}

// --- TriMesh --------------------------------------------------------------------

void TriMesh::build_index() {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& p : dom) {
        x0 = std::min(x0, p.r);
        x1 = std::max(x1, p.r);
        y0 = std::min(y0, p.s);
        y1 = std::max(y1, p.s);
    }
    const int n = std::max(4, static_cast<int>(std::sqrt(static_cast<double>(tris.size()))) * 2);
    gx0_ = x0;
    gy0_ = y0;
    gnx_ = n;
    gny_ = n;
    gcell_ = std::max((x1 - x0) / n, (y1 - y0) / n);
    if (gcell_ <= 0.0) gcell_ = 1.0;
    grid_.assign(static_cast<std::size_t>(gnx_) * gny_, {});
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const auto& tri = tris[t];
        double tx0 = 1e300, tx1 = -1e300, ty0 = 1e300, ty1 = -1e300;
        for (int k = 0; k < 3; ++k) {
            const auto& p = dom[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
            tx0 = std::min(tx0, p.r);
            tx1 = std::max(tx1, p.r);
            ty0 = std::min(ty0, p.s);
            ty1 = std::max(ty1, p.s);
        }
        const int i0 = std::clamp(static_cast<int>((tx0 - gx0_) / gcell_), 0, gnx_ - 1);
        const int i1 = std::clamp(static_cast<int>((tx1 - gx0_) / gcell_), 0, gnx_ - 1);
        const int j0 = std::clamp(static_cast<int>((ty0 - gy0_) / gcell_), 0, gny_ - 1);
        const int j1 = std::clamp(static_cast<int>((ty1 - gy0_) / gcell_), 0, gny_ - 1);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j)
                grid_[static_cast<std::size_t>(j) * gnx_ + i].push_back(static_cast<int>(t));
    }
}

bool TriMesh::eval(const PlanarPoint& p, PlanarPoint& out) const {
    const int gi = std::clamp(static_cast<int>((p.r - gx0_) / gcell_), 0, gnx_ - 1);
    const int gj = std::clamp(static_cast<int>((p.s - gy0_) / gcell_), 0, gny_ - 1);
    const auto& bucket = grid_[static_cast<std::size_t>(gj) * gnx_ + gi];
    double best = -1e300;
    int best_t = -1;
    double bl0 = 0, bl1 = 0;
    auto consider = [&](int t) {
        const auto& tri = tris[static_cast<std::size_t>(t)];
        const auto& a = dom[static_cast<std::size_t>(tri[0])];
        const auto& b = dom[static_cast<std::size_t>(tri[1])];
        const auto& c = dom[static_cast<std::size_t>(tri[2])];
        const double den = cross2(sub(b, a), sub(c, a));
        if (den == 0.0) return false;
        const double l0 = cross2(sub(b, p), sub(c, p)) / den;
        const double l1 = cross2(sub(c, p), sub(a, p)) / den;
        const double l2 = 1.0 - l0 - l1;
        const double mn = std::min({l0, l1, l2});
        if (mn > best) {
            best = mn;
            best_t = t;
            bl0 = l0;
            bl1 = l1;
        }
        return mn >= -1e-12;
    };
    bool hit = false;
    for (int t : bucket)
        if (consider(t)) {
            hit = true;
            break;
        }
    if (!hit && best < -1e-12) {
        for (std::size_t t = 0; t < tris.size(); ++t)
            if (consider(static_cast<int>(t))) break;
    }
    if (best_t < 0 || best < -1e-6) return false;
    double l0 = std::max(bl0, 0.0), l1 = std::max(bl1, 0.0);
    double l2 = std::max(1.0 - bl0 - bl1, 0.0);
    const double sum = l0 + l1 + l2;
    l0 /= sum;
    l1 /= sum;
    l2 /= sum;
    const auto& tri = tris[static_cast<std::size_t>(best_t)];
    const auto& ia = img[static_cast<std::size_t>(tri[0])];
    const auto& ib = img[static_cast<std::size_t>(tri[1])];
    const auto& ic = img[static_cast<std::size_t>(tri[2])];
    out = {l0 * ia.r + l1 * ib.r + l2 * ic.r, l0 * ia.s + l1 * ib.s + l2 * ic.s};
    return true;
}

// --- ear clipping / refinement / harmonic solve ---------------------------------

namespace {

bool point_in_tri_closed(const PlanarPoint& p, const PlanarPoint& a, const PlanarPoint& b,
                         const PlanarPoint& c, double tol) {
    const double den = cross2(sub(b, a), sub(c, a));
    if (den == 0.0) return false;
    const double l0 = cross2(sub(b, p), sub(c, p)) / den;
    const double l1 = cross2(sub(c, p), sub(a, p)) / den;
    const double l2 = 1.0 - l0 - l1;
    return l0 >= -tol && l1 >= -tol && l2 >= -tol;
}

std::vector<std::array<int, 3>> ear_clip(const std::vector<PlanarPoint>& poly) {
    const std::size_t n = poly.size();
    if (n < 3) throw InternalError("ear_clip: degenerate polygon");
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::array<int, 3>> tris;
    double scale = 0.0;
    for (const auto& p : poly) scale = std::max({scale, std::abs(p.r), std::abs(p.s)});
    const double eps = 1e-14 * scale * scale;
    long long guard = 0;
    while (idx.size() > 3) {
        if (++guard > 8LL * static_cast<long long>(n) * static_cast<long long>(n))
            throw InternalError("ear_clip: no progress");
        bool clipped = false;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const int ia = idx[(i + idx.size() - 1) % idx.size()];
            const int ib = idx[i];
            const int ic = idx[(i + 1) % idx.size()];
            const auto& a = poly[static_cast<std::size_t>(ia)];
            const auto& b = poly[static_cast<std::size_t>(ib)];
            const auto& c = poly[static_cast<std::size_t>(ic)];
            if (cross2(sub(b, a), sub(c, b)) <= eps) continue;
            bool ok = true;
            for (int j : idx) {
                if (j == ia || j == ib || j == ic) continue;
                if (point_in_tri_closed(poly[static_cast<std::size_t>(j)], a, b, c, 1e-12)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            tris.push_back({ia, ib, ic});
            idx.erase(idx.begin() + static_cast<long>(i));
            clipped = true;
            break;
        }
        if (!clipped) throw InternalError("ear_clip: stuck (nearly degenerate polygon)");
    }
    tris.push_back({idx[0], idx[1], idx[2]});
    return tris;
}

struct RefinedMesh {
    std::vector<PlanarPoint> verts;
    std::vector<std::array<int, 3>> tris;
    std::size_t n_boundary = 0;
};

// Split every interior edge of an ear-clip triangulation at its midpoint.
// All such edges join two polygon vertices; splitting them removes the
// dividing chords that can fold a convex-combination map when part of the
// boundary maps onto a straight segment.
std::vector<std::array<int, 3>> split_interior_edges(std::vector<PlanarPoint>& verts,
                                                     const std::vector<std::array<int, 3>>& tris) {
    std::map<std::pair<int, int>, int> occurrences;
    const auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    for (const auto& t : tris)
        for (int k = 0; k < 3; ++k)
            occurrences[key(t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>((k + 1) % 3)])]++;
    std::map<std::pair<int, int>, int> midpoint;
    for (const auto& [e, c] : occurrences) {
        if (c == 2) {
            const auto& a = verts[static_cast<std::size_t>(e.first)];
            const auto& b = verts[static_cast<std::size_t>(e.second)];
            midpoint[e] = static_cast<int>(verts.size());
            verts.push_back({0.5 * (a.r + b.r), 0.5 * (a.s + b.s)});
        }
    }
    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris) {
        int v[3] = {t[0], t[1], t[2]};
        int m[3];  // m[k] = midpoint of edge (v[k], v[k+1]) or -1
        int nsplit = 0;
        for (int k = 0; k < 3; ++k) {
            const auto it = midpoint.find(key(v[k], v[(k + 1) % 3]));
            m[k] = it == midpoint.end() ? -1 : it->second;
            if (m[k] >= 0) ++nsplit;
        }
        // rotate so the split pattern is canonical
        auto rot = [&]() {
            const int tv = v[0], tm = m[0];
            v[0] = v[1];
            v[1] = v[2];
            v[2] = tv;
            m[0] = m[1];
            m[1] = m[2];
            m[2] = tm;
        };
        if (nsplit == 0) {
            out.push_back({v[0], v[1], v[2]});
        } else if (nsplit == 1) {
            while (m[0] < 0) rot();
            out.push_back({v[0], m[0], v[2]});
            out.push_back({m[0], v[1], v[2]});
        } else if (nsplit == 2) {
            while (!(m[0] >= 0 && m[1] >= 0)) rot();
            out.push_back({m[0], v[1], m[1]});
            out.push_back({v[0], m[0], m[1]});
            out.push_back({v[0], m[1], v[2]});
        } else {
            out.push_back({v[0], m[0], m[2]});
            out.push_back({m[0], v[1], m[1]});
            out.push_back({m[2], m[1], v[2]});
            out.push_back({m[0], m[1], m[2]});
        }
    }
    return out;
}

RefinedMesh barycentric_refine(const std::vector<PlanarPoint>& poly,
                               const std::vector<std::array<int, 3>>& tris) {
    RefinedMesh m;
    m.verts = poly;
    m.n_boundary = poly.size();
    for (const auto& t : tris) {
        const auto& a = poly[static_cast<std::size_t>(t[0])];
        const auto& b = poly[static_cast<std::size_t>(t[1])];
        const auto& c = poly[static_cast<std::size_t>(t[2])];
        const int g = static_cast<int>(m.verts.size());
        m.verts.push_back({(a.r + b.r + c.r) / 3.0, (a.s + b.s + c.s) / 3.0});
        m.tris.push_back({t[0], t[1], g});
        m.tris.push_back({t[1], t[2], g});
        m.tris.push_back({t[2], t[0], g});
    }
    return m;
}

std::vector<PlanarPoint> harmonic_positions(const RefinedMesh& mesh,
                                            const std::vector<PlanarPoint>& boundary_targets) {
    const std::size_t nv = mesh.verts.size();
    const std::size_t nb = mesh.n_boundary;
    const std::size_t ni = nv - nb;
    std::vector<std::set<int>> adj(nv);
    for (const auto& t : mesh.tris) {
        for (int k = 0; k < 3; ++k) {
            const int u = t[static_cast<std::size_t>(k)];
            const int v = t[static_cast<std::size_t>((k + 1) % 3)];
            adj[static_cast<std::size_t>(u)].insert(v);
            adj[static_cast<std::size_t>(v)].insert(u);
        }
    }
    std::vector<PlanarPoint> out(nv);
    for (std::size_t i = 0; i < nb; ++i) out[i] = boundary_targets[i];
    if (ni == 0) return out;

    Eigen::SparseMatrix<double> L(static_cast<long>(ni), static_cast<long>(ni));
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd bx = Eigen::VectorXd::Zero(static_cast<long>(ni));
    Eigen::VectorXd by = Eigen::VectorXd::Zero(static_cast<long>(ni));
    for (std::size_t i = nb; i < nv; ++i) {
        const long li = static_cast<long>(i - nb);
        const auto& nbrs = adj[i];
        trips.emplace_back(li, li, static_cast<double>(nbrs.size()));
        for (int j : nbrs) {
            if (static_cast<std::size_t>(j) >= nb) {
                trips.emplace_back(li, static_cast<long>(static_cast<std::size_t>(j) - nb), -1.0);
            } else {
                bx(li) += boundary_targets[static_cast<std::size_t>(j)].r;
                by(li) += boundary_targets[static_cast<std::size_t>(j)].s;
            }
        }
    }
    L.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(L);
    if (solver.info() != Eigen::Success)
        throw InternalError("harmonic_positions: factorization failed");
    const Eigen::VectorXd xs = solver.solve(bx);
    const Eigen::VectorXd ys = solver.solve(by);
    for (std::size_t i = nb; i < nv; ++i) {
        out[i] = {xs(static_cast<long>(i - nb)), ys(static_cast<long>(i - nb))};
    }
    return out;
}

}  // namespace

// --- Permeating ------------------------------------------------------------------

PlanarPoint Permeating::to_canonical(const PlanarPoint& p) const {
    return hutch_.edge == 1 ? p : mirror_s(p);
}

PlanarPoint Permeating::from_canonical(const PlanarPoint& p) const {
    return hutch_.edge == 1 ? p : mirror_s(p);
}

Permeating::Permeating(Hutch hutch, double mesh_h) : hutch_(std::move(hutch)), mesh_h_(mesh_h) {
    hutch_.validate();
    if (!(mesh_h_ > 0.0)) throw InvalidInputError("permeating: mesh_h must be positive");
    build();
}

void Permeating::build() {
    tree_ = hutch_.hanging.tree;
    std::vector<PlanarPoint> poly(hutch_.disc.boundary.pts.begin(),
                                  hutch_.disc.boundary.pts.end() - 1);
    if (hutch_.edge == -1) {
        for (auto& v : tree_.vertices) v = mirror_s(v);
        for (auto& v : poly) v = mirror_s(v);
    }
    if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
    poly_ = std::move(poly);

    build_walk();
    build_ring();
    build_stage1();
}

void Permeating::build_walk() {
    const double h = mesh_h_;
    const int bv = hutch_.hanging.base_vertex;
    const auto& V = tree_.vertices;

    for (std::size_t e1 = 0; e1 < tree_.edges.size(); ++e1) {
        for (std::size_t e2 = e1 + 1; e2 < tree_.edges.size(); ++e2) {
            const auto& [a1, b1] = tree_.edges[e1];
            const auto& [a2, b2] = tree_.edges[e2];
            if (a1 == a2 || a1 == b2 || b1 == a2 || b1 == b2) continue;
            double d = 1e300;
            d = std::min(d, point_segment_distance(V[a1], V[a2], V[b2]));
            d = std::min(d, point_segment_distance(V[b1], V[a2], V[b2]));
            d = std::min(d, point_segment_distance(V[a2], V[a1], V[b1]));
            d = std::min(d, point_segment_distance(V[b2], V[a1], V[b1]));
            if (d < 4.5 * h) {
                std::ostringstream os;
                os << "resolution error: non-adjacent tree edges at distance " << d
                   << " < 4.5 * mesh_h; suggested mesh_h = " << d / 5.0;
                throw ResolutionError(os.str());
            }
        }
    }
    for (const auto& [u, v] : tree_.edges) {
        if (euclidean_distance(V[u], V[v]) < 4.0 * h) {
            std::ostringstream os;
            os << "resolution error: tree edge shorter than 4 * mesh_h; suggested mesh_h = "
               << euclidean_distance(V[u], V[v]) / 5.0;
            throw ResolutionError(os.str());
        }
    }

    const auto angle_of = [&](int from, int to) {
        return std::atan2(V[to].s - V[from].s, V[to].r - V[from].r);
    };
    const auto next_ccw = [&](int v, int from) {
        const auto ns = tree_.neighbors(v);
        std::vector<std::pair<double, int>> byang;
        for (int w : ns) byang.push_back({angle_of(v, w), w});
        std::sort(byang.begin(), byang.end());
        const double a0 = angle_of(v, from);
        for (const auto& [a, w] : byang)
            if (a > a0 + 1e-15) return w;
        return byang.front().second;
    };

    const int stem = tree_.neighbors(bv).front();
    {
        const PlanarPoint d = unit(sub(V[stem], V[bv]));
        if (d.s > -0.3)
            throw InvalidInputError("hanging set: stem must descend from the edge steeply enough");
    }

    std::vector<std::pair<int, int>> tour;
    {
        int u = bv, v = stem;
        for (std::size_t guard = 0; guard <= 2 * tree_.edges.size(); ++guard) {
            tour.push_back({u, v});
            if (v == bv) break;
            const int w = next_ccw(v, u);
            u = v;
            v = w;
        }
        if (tour.back().second != bv) throw InternalError("contour walk did not close");
    }

    wall_.clear();
    wall_dev_ = 0.0;
    const auto push = [&](const PlanarPoint& w, const PlanarPoint& x, bool floating) {
        if (!wall_.empty() && euclidean_distance(wall_.back().wall, w) < 1e-13) return;
        WallPoint wp;
        wp.wall = w;
        wp.shadow = x;
        wp.outer = {2.0 * w.r - x.r, 2.0 * w.s - x.s};
        wp.floating = floating;
        wall_.push_back(wp);
    };
    const auto is_float = [&](int v) { return hutch_.hanging.vertex_is_floating(v); };

    for (std::size_t step = 0; step < tour.size(); ++step) {
        const auto [u, v] = tour[step];
        const PlanarPoint d = unit(sub(V[v], V[u]));
        const PlanarPoint n = rot_cw(d);
        const PlanarPoint pu = add(V[u], scale(n, h));
        const PlanarPoint pv = add(V[v], scale(n, h));

        if (step == 0) {
            const double t = (1.0 - pu.s) / d.s;
            mouth_left_ = add(pu, scale(d, t));
            push(mouth_left_, V[bv], false);
        }

        if (v == bv) {
            const double t = (1.0 - pv.s) / d.s;
            mouth_right_ = add(pv, scale(d, t));
            push(mouth_right_, V[bv], false);
            break;
        }

        const int w = next_ccw(v, u);
        const PlanarPoint d2 = unit(sub(V[w], V[v]));
        const PlanarPoint n2 = rot_cw(d2);
        const double a_in = std::atan2(n.s, n.r);
        const double a_out = std::atan2(n2.s, n2.r);
        double delta = a_out - a_in;
        while (delta < 0.0) delta += 2.0 * M_PI;
        while (delta >= 2.0 * M_PI) delta -= 2.0 * M_PI;

        if (delta <= M_PI + 1e-12) {
            push(pv, V[v], is_float(v));
            const int steps = std::max(1, static_cast<int>(std::ceil(delta / (M_PI / 6.0))));
            for (int k = 1; k <= steps; ++k) {
                const double a = a_in + delta * k / steps;
                push(add(V[v], {h * std::cos(a), h * std::sin(a)}), V[v], is_float(v));
            }
            if (delta > 0.0)
                wall_dev_ = std::max(wall_dev_, h * (1.0 - std::cos(0.5 * delta / steps)));
        } else {
            const PlanarPoint q2 = add(V[v], scale(n2, h));
            const double den = cross2(d, d2);
            if (std::abs(den) < 1e-14)
                throw ResolutionError("resolution error: degenerate miter at a tree vertex");
            const double t = cross2(sub(q2, pu), d2) / den;
            const PlanarPoint m = add(pu, scale(d, t));
            if (euclidean_distance(m, V[v]) > 3.0 * h) {
                std::ostringstream os;
                os << "resolution error: miter spike at a sharp tree angle (length "
                   << euclidean_distance(m, V[v]) << " > 3 * mesh_h)";
                throw ResolutionError(os.str());
            }
            push(m, V[v], is_float(v));
        }
    }

    if (wall_.size() < 3) throw InternalError("contour walk too short");

    const Segment1D A = hutch_.base_arc;
    const auto check_edge_pt = [&](const PlanarPoint& p) {
        if (!(p.r > A.lo + 0.5 * h && p.r < A.hi - 0.5 * h)) {
            std::ostringstream os;
            os << "resolution error: channel mouth leaves the base arc; suggested mesh_h = "
               << mesh_h_ / 2.0;
            throw ResolutionError(os.str());
        }
    };
    const PolygonDisc canon_disc = PolygonDisc::from_vertices(poly_);
    for (const auto& wp : wall_) {
        for (const PlanarPoint* p : {&wp.wall, &wp.outer}) {
            if (std::abs(p->s - 1.0) < 1e-13) {
                check_edge_pt(*p);
            } else if (point_in_disc(*p, canon_disc) != DiscLocation::Inside) {
                std::ostringstream os;
                os << "resolution error: channel escapes the hutch; suggested mesh_h = "
                   << mesh_h_ / 2.0;
                throw ResolutionError(os.str());
            }
        }
    }
    for (std::size_t i = 0; i < wall_.size(); ++i) {
        for (std::size_t j = i + 1; j < wall_.size(); ++j) {
            if (segments_cross(wall_[i].shadow, wall_[i].outer, wall_[j].shadow, wall_[j].outer))
                throw ResolutionError(
                    "resolution error: collapse rays cross; reduce mesh_h or widen tree angles");
        }
    }

    marked_arc_ = Segment1D(std::min(mouth_left_.r, mouth_right_.r),
                            std::max(mouth_left_.r, mouth_right_.r));
    std::size_t f0 = wall_.size(), f1 = 0;
    for (std::size_t i = 0; i < wall_.size(); ++i) {
        if (wall_[i].floating) {
            f0 = std::min(f0, i);
            f1 = std::max(f1, i);
        }
    }
    if (f0 <= f1 && f0 < wall_.size()) {
        double total = 0.0;
        std::vector<double> cum(wall_.size(), 0.0);
        for (std::size_t i = 1; i < wall_.size(); ++i) {
            total += euclidean_distance(wall_[i - 1].wall, wall_[i].wall);
            cum[i] = total;
        }
        const double flo = cum[f0] / total;
        const double fhi = cum[f1] / total;
        const double a0 = mouth_left_.r + flo * (mouth_right_.r - mouth_left_.r);
        const double a1 = mouth_left_.r + fhi * (mouth_right_.r - mouth_left_.r);
        floating_arc_ = Segment1D(std::min(a0, a1), std::max(a0, a1));
    } else {
        floating_arc_ = marked_arc_;
    }
}

void Permeating::build_ring() {
    ring_dom_.clear();
    ring_img_.clear();
    for (std::size_t i = 0; i + 1 < wall_.size(); ++i) {
        const auto& a = wall_[i];
        const auto& b = wall_[i + 1];
        ring_dom_.push_back({a.wall, b.wall, a.outer});
        ring_img_.push_back({a.shadow, b.shadow, a.outer});
        ring_dom_.push_back({b.wall, b.outer, a.outer});
        ring_img_.push_back({b.shadow, b.outer, a.outer});
    }
}

void Permeating::build_stage1() {
    const double alo = hutch_.base_arc.lo;
    const double ahi = hutch_.base_arc.hi;
    const std::size_t n = poly_.size();
    std::size_t iR = n, iL = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (poly_[i].s == 1.0) {
            if (std::abs(poly_[i].r - ahi) < 1e-14) iR = i;
            if (std::abs(poly_[i].r - alo) < 1e-14) iL = i;
        }
    }
    if (iR == n || iL == n) throw InternalError("stage1: base corners not found");

    std::vector<PlanarPoint> dpoly;
    std::vector<PlanarPoint> targets;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = (iL + k) % n;
        dpoly.push_back(poly_[i]);
        targets.push_back(poly_[i]);
        if (i == iR) break;
    }
    double total = 0.0;
    std::vector<double> cum(wall_.size(), 0.0);
    for (std::size_t i = 1; i < wall_.size(); ++i) {
        total += euclidean_distance(wall_[i - 1].wall, wall_[i].wall);
        cum[i] = total;
    }
    for (std::size_t k = wall_.size(); k-- > 0;) {
        dpoly.push_back(wall_[k].wall);
        const double frac = cum[k] / total;
        targets.push_back({mouth_left_.r + frac * (mouth_right_.r - mouth_left_.r), 1.0});
    }
    if (signed_area(dpoly) <= 0.0) throw InternalError("stage1: dug polygon is not CCW");

    const auto tris = ear_clip(dpoly);
    std::vector<PlanarPoint> verts = dpoly;
    const auto split = split_interior_edges(verts, tris);
    RefinedMesh mesh = barycentric_refine(verts, split);
    mesh.n_boundary = dpoly.size();  // midpoints of interior edges are interior
    const auto solved = harmonic_positions(mesh, targets);

    for (const auto& t : mesh.tris) {
        const auto& a = solved[static_cast<std::size_t>(t[0])];
        const auto& b = solved[static_cast<std::size_t>(t[1])];
        const auto& c = solved[static_cast<std::size_t>(t[2])];
        if (cross2(sub(b, a), sub(c, a)) <= 0.0)
            throw ResolutionError(
                "resolution error: dug-disc mesh folded under the harmonic map; reduce mesh_h");
    }

    stage1_inv_.dom = mesh.verts;
    stage1_inv_.img = solved;
    stage1_inv_.tris = mesh.tris;
    stage1_inv_.build_index();

    stage1_fwd_.dom = solved;
    stage1_fwd_.img = mesh.verts;
    stage1_fwd_.tris = mesh.tris;
    stage1_fwd_.build_index();
}

bool Permeating::contains(const PlanarPoint& p) const {
    return point_in_disc(p, hutch_.disc) != DiscLocation::Outside;
}

double Permeating::distance_to_hanging(const PlanarPoint& p) const {
    return hutch_.hanging.tree.distance_to(p);
}

namespace {

PlanarPoint affine_tri(const std::array<PlanarPoint, 3>& dom, const std::array<PlanarPoint, 3>& img,
                       const PlanarPoint& p, bool& ok, double tol) {
    const double den = cross2(sub(dom[1], dom[0]), sub(dom[2], dom[0]));
    if (den == 0.0) {
        ok = false;
        return p;
    }
    const double l0 = cross2(sub(dom[1], p), sub(dom[2], p)) / den;
    const double l1 = cross2(sub(dom[2], p), sub(dom[0], p)) / den;
    const double l2 = 1.0 - l0 - l1;
    if (l0 < -tol || l1 < -tol || l2 < -tol) {
        ok = false;
        return p;
    }
    ok = true;
    return {l0 * img[0].r + l1 * img[1].r + l2 * img[2].r,
            l0 * img[0].s + l1 * img[1].s + l2 * img[2].s};
}

}  // namespace

PlanarPoint Permeating::forward(const PlanarPoint& x) const {
    const PlanarPoint xc = to_canonical(x);
    // exact identity on the boundary off the collapse mouth
    {
        const std::size_t n = poly_.size();
        const double mo_lo = std::min(wall_.front().outer.r, wall_.back().outer.r);
        const double mo_hi = std::max(wall_.front().outer.r, wall_.back().outer.r);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& a = poly_[i];
            const auto& b = poly_[(i + 1) % n];
            const bool base_side = (a.s == 1.0 && b.s == 1.0);
            if (base_side && xc.s == 1.0) {
                if (xc.r >= std::min(a.r, b.r) && xc.r <= std::max(a.r, b.r) &&
                    (xc.r < mo_lo || xc.r > mo_hi))
                    return x;
                continue;
            }
            const double cr = (b.r - a.r) * (xc.s - a.s) - (b.s - a.s) * (xc.r - a.r);
            if (cr == 0.0 && xc.r >= std::min(a.r, b.r) && xc.r <= std::max(a.r, b.r) &&
                xc.s >= std::min(a.s, b.s) && xc.s <= std::max(a.s, b.s))
                return x;
        }
    }
    PlanarPoint u;
    if (!stage1_fwd_.eval(xc, u)) {
        throw InternalError("permeating forward: mesh lookup failure (point outside the hutch?)");
    }
    for (std::size_t t = 0; t < ring_dom_.size(); ++t) {
        bool ok = false;
        const PlanarPoint y = affine_tri(ring_dom_[t], ring_img_[t], u, ok, 1e-10);
        if (ok) return from_canonical(y);
    }
    return from_canonical(u);
}

PlanarPoint Permeating::inverse(const PlanarPoint& y) const {
    const PlanarPoint yc = to_canonical(y);
    PlanarPoint u = yc;
    double best = -1e300;
    std::size_t best_t = 0;
    for (std::size_t t = 0; t < ring_img_.size(); ++t) {
        const auto& img = ring_img_[t];
        const double den = cross2(sub(img[1], img[0]), sub(img[2], img[0]));
        if (std::abs(den) < 1e-18) continue;
        const double l0 = cross2(sub(img[1], yc), sub(img[2], yc)) / den;
        const double l1 = cross2(sub(img[2], yc), sub(img[0], yc)) / den;
        const double l2 = 1.0 - l0 - l1;
        const double mn = std::min({l0, l1, l2});
        if (mn > best) {
            best = mn;
            best_t = t;
        }
        if (mn >= -1e-12) break;
    }
    if (best >= -1e-9) {
        const auto& img = ring_img_[best_t];
        const auto& dom = ring_dom_[best_t];
        bool ok = false;
        const PlanarPoint cand = affine_tri(img, dom, yc, ok, 1e-6);
        if (ok) u = cand;
    }
    PlanarPoint x;
    if (!stage1_inv_.eval(u, x)) {
        throw InternalError("permeating inverse: mesh lookup failure");
    }
    return from_canonical(x);
}

PermeatingPtr build_tree_permeating(const Hutch& hutch, double mesh_h) {
    return std::make_shared<Permeating>(hutch, mesh_h);
}

double recommended_mesh_h(const Hutch& hutch) {
    const auto& T = hutch.hanging.tree;
    const auto& pts = hutch.disc.boundary.pts;
    const double se = static_cast<double>(hutch.edge);
    const auto seg_seg = [](const PlanarPoint& a, const PlanarPoint& b, const PlanarPoint& c,
                            const PlanarPoint& d) {
        return std::min(std::min(point_segment_distance(a, c, d), point_segment_distance(b, c, d)),
                        std::min(point_segment_distance(c, a, b), point_segment_distance(d, a, b)));
    };
    // clearance of the hanging set from the non-edge hutch sides
    double c1 = 1e300;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i].s == se && pts[i + 1].s == se) continue;
        for (const auto& [u, v] : T.edges)
            c1 = std::min(c1, seg_seg(T.vertices[static_cast<std::size_t>(u)],
                                      T.vertices[static_cast<std::size_t>(v)], pts[i], pts[i + 1]));
    }
    // room on the base arc around the base point
    const auto& bp = T.vertices[static_cast<std::size_t>(hutch.hanging.base_vertex)];
    const double c2 = std::min(bp.r - hutch.base_arc.lo, hutch.base_arc.hi - bp.r);
    // feature sizes of the tree itself
    double c3 = 1e300;
    for (const auto& [u, v] : T.edges)
        c3 = std::min(c3, euclidean_distance(T.vertices[static_cast<std::size_t>(u)],
                                             T.vertices[static_cast<std::size_t>(v)]));
    double c4 = 1e300;
    for (std::size_t e1 = 0; e1 < T.edges.size(); ++e1) {
        for (std::size_t e2 = e1 + 1; e2 < T.edges.size(); ++e2) {
            const auto& [a1, b1] = T.edges[e1];
            const auto& [a2, b2] = T.edges[e2];
            if (a1 == a2 || a1 == b2 || b1 == a2 || b1 == b2) continue;
            c4 = std::min(c4, seg_seg(T.vertices[static_cast<std::size_t>(a1)],
                                      T.vertices[static_cast<std::size_t>(b1)],
                                      T.vertices[static_cast<std::size_t>(a2)],
                                      T.vertices[static_cast<std::size_t>(b2)]));
        }
    }
    return 0.95 * std::min(std::min(c1 / 2.4, 0.35 * c2), std::min(c3 / 4.6, c4 / 4.6));
}

// --- compositive -----------------------------------------------------------------

CompositivePermeating::CompositivePermeating(std::vector<PermeatingPtr> members)
    : members_(std::move(members)) {
    for (std::size_t i = 0; i < members_.size(); ++i) {
        for (std::size_t j = i + 1; j < members_.size(); ++j) {
            if (!polygons_disjoint(members_[i]->hutch().disc, members_[j]->hutch().disc)) {
                std::ostringstream os;
                os << "invalid-family: hutches " << i << " and " << j << " overlap";
                throw InvalidInputError(os.str());
            }
        }
    }
    for (const auto& m : members_) {
        double d = 0.0;
        const auto& pts = m->hutch().disc.boundary.pts;
        for (std::size_t a = 0; a < pts.size(); ++a)
            for (std::size_t b = a + 1; b < pts.size(); ++b)
                d = std::max(d, euclidean_distance(pts[a], pts[b]));
        max_diameter_ = std::max(max_diameter_, d);
    }
}

bool CompositivePermeating::on_exceptional_set(const PlanarPoint& p, double tol) const {
    if (std::abs(p.s) == 1.0) return true;
    for (const auto& m : members_)
        if (m->distance_to_hanging(p) <= tol) return true;
    return false;
}

double CompositivePermeating::distance_to_exceptional(const PlanarPoint& p) const {
    double d = std::min(1.0 - p.s, p.s + 1.0);
    for (const auto& m : members_) d = std::min(d, m->distance_to_hanging(p));
    return d;
}

PlanarPoint CompositivePermeating::forward(const PlanarPoint& x) const {
    require_in_square(x, "compositive_permeating.forward");
    for (const auto& m : members_)
        if (m->contains(x)) return m->forward(x);
    return x;
}

PlanarPoint CompositivePermeating::inverse(const PlanarPoint& y) const {
    require_in_square(y, "compositive_permeating.inverse");
    double guard = 0.0;
    for (const auto& m : members_) guard = std::max(guard, m->mesh_h());
    if (std::abs(y.s) == 1.0) {
        std::ostringstream os;
        os << "near-singular: inverse on a horizontal edge at (" << y.r << ", " << y.s << ")";
        throw NearSingularError(os.str());
    }
    for (const auto& m : members_) {
        if (m->contains(y)) {
            if (m->distance_to_hanging(y) <= guard) {
                std::ostringstream os;
                os << "near-singular: inverse at (" << y.r << ", " << y.s
                   << ") within mesh_h of the exceptional set";
                throw NearSingularError(os.str());
            }
            return m->inverse(y);
        }
    }
    return y;
}

CompositivePtr build_compositive(std::vector<PermeatingPtr> members) {
    return std::make_shared<CompositivePermeating>(std::move(members));
}

PlanarPoint eval_permeating_forward(const CompositivePermeating& xi, const PlanarPoint& x) {
    return xi.forward(x);
}

PlanarPoint eval_permeating_inverse(const CompositivePermeating& xi, const PlanarPoint& x) {
    return xi.inverse(x);
}

namespace {

class PermeatingNode final : public MapNode {
public:
    explicit PermeatingNode(CompositivePtr xi) : xi_(std::move(xi)) {}
    PlanarPoint forward(const PlanarPoint& x) const override { return xi_->forward(x); }
    PlanarPoint inverse(const PlanarPoint& y) const override {
        if (xi_->on_exceptional_set(y))
            throw NotInvertibleError(
                "permeating node: single-valued inverse undefined on the exceptional set");
        return xi_->inverse(y);
    }
    std::string kind() const override { return "compositive_permeating"; }
    nlohmann::json describe() const override {
        nlohmann::json hutches = nlohmann::json::array();
        for (const auto& m : xi_->members()) {
            nlohmann::json verts = nlohmann::json::array();
            for (const auto& p : m->hutch().disc.boundary.pts) verts.push_back({p.r, p.s});
            hutches.push_back({{"edge", m->hutch().edge},
                               {"mesh_h", m->mesh_h()},
                               {"polygon", verts}});
        }
        return {{"kind", kind()}, {"hutches", hutches}};
    }
    bool is_homeomorphism() const override { return false; }
    bool fixes_exceptional(const PlanarPoint& p) const override {
        return xi_->on_exceptional_set(p);
    }

private:
    CompositivePtr xi_;
};

}  // namespace

MapExpr permeating_expr(CompositivePtr xi) {
    return MapExpr(std::make_shared<PermeatingNode>(std::move(xi)));
}

// --- placement -------------------------------------------------------------------

namespace {

bool point_on_segment(const PlanarPoint& p, const PlanarPoint& a, const PlanarPoint& b,
                      double tol) {
    return point_segment_distance(p, a, b) <= tol;
}

}  // namespace

std::vector<PlacedTarget> place_cables_and_hutches(
    const std::vector<std::pair<PlanarPoint, int>>& targets, const PointEnumeration& W,
    const PlacementParams& params) {
    if (targets.empty()) return {};
    for (const auto& [y, edge] : targets) {
        if (edge != 1 && edge != -1)
            throw InvalidInputError("placement: target edge must be +1 or -1");
        if (!(std::abs(y.r) < 1.0 && std::abs(y.s) < 1.0))
            throw InvalidInputError("placement: targets must be interior points");
        if (edge == 1 && !(y.s < 1.0 - 1e-6))
            throw InvalidInputError("placement: degenerate zero-length cable");
        if (edge == -1 && !(y.s > -1.0 + 1e-6))
            throw InvalidInputError("placement: degenerate zero-length cable");
    }
    for (std::size_t i = 0; i < targets.size(); ++i)
        for (std::size_t j = i + 1; j < targets.size(); ++j)
            if (targets[i].first == targets[j].first)
                throw InvalidInputError("placement: coincident targets");

    std::vector<PlanarPoint> avoid;
    for (int fam = 0; fam < W.families(); ++fam) {
        const long long prefix = params.avoid_prefix / W.families();
        for (long long i = 0; i < prefix; ++i) avoid.push_back(W.point(fam, i));
    }

    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < targets.size(); ++i) groups[targets[i].first.r].push_back(i);
    std::vector<double> betas;
    for (const auto& [b, _] : groups) betas.push_back(b);

    std::vector<PlacedTarget> placed(targets.size());
    for (const auto& [beta, ids] : groups) {
        double gap = std::min(1.0 - beta, beta + 1.0);
        for (double b2 : betas)
            if (b2 != beta) gap = std::min(gap, std::abs(b2 - beta));
        const double delta = params.delta_fraction * gap;
        if (!(delta > 0.0)) throw PlacementError("placement: target abscissa on the square edge");

        double mu = -1.0;
        std::vector<PlanarPoint> anchors(ids.size());
        std::string conflicts;
        for (int scan = 0; scan < params.mu_scan_depth; ++scan) {
            const double cand = delta * std::exp2(-scan);
            bool ok = true;
            conflicts.clear();
            for (std::size_t k = 0; k < ids.size(); ++k) {
                const auto& [y, edge] = targets[ids[k]];
                const PlanarPoint anchor = edge == 1
                    ? PlanarPoint{y.r + cand * (1.0 - y.s), 1.0}
                    : PlanarPoint{y.r - cand * (1.0 + y.s), -1.0};
                anchors[k] = anchor;
                if (std::abs(anchor.r) >= 1.0 - 1e-9) {
                    ok = false;
                    break;
                }
                for (const auto& w : avoid) {
                    if (point_on_segment(w, y, anchor, 1e-12)) {
                        std::ostringstream os;
                        os << "W point (" << w.r << ", " << w.s << ") on cable of (" << y.r
                           << ", " << y.s << "); ";
                        conflicts += os.str();
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
                for (const auto& [y2, e2] : targets) {
                    if (y2 == y) continue;
                    if (point_on_segment(y2, y, anchor, 1e-12)) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
            }
            if (ok) {
                mu = cand;
                break;
            }
        }
        if (mu < 0.0)
            throw PlacementError("placement error: no admissible cable tilt; conflicts: " +
                                 conflicts);

        double wlim = 0.45 * mu * 2.0;
        for (std::size_t a = 0; a < ids.size(); ++a) {
            for (std::size_t b = a + 1; b < ids.size(); ++b) {
                const double ds = std::abs(targets[ids[a]].first.s - targets[ids[b]].first.s);
                wlim = std::min(wlim, 0.45 * mu * ds);
            }
        }

        for (std::size_t k = 0; k < ids.size(); ++k) {
            const std::size_t ti = ids[k];
            const auto& [y, edge] = targets[ti];
            const PlanarPoint anchor = anchors[k];
            const double span = edge == 1 ? (1.0 - y.s) : (1.0 + y.s);
            const double cable_len = span * std::hypot(mu, 1.0);

            double w = std::min(wlim, 0.2 * cable_len);
            double dm = params.depth_margin;
            PlacedTarget pt;
            pt.point = y;
            pt.edge = edge;
            pt.anchor = anchor;
            pt.mu = mu;
            bool built = false;
            for (int shrink = 0; shrink < 60 && !built; ++shrink) {
                const double depth =
                    span + std::min(std::max(dm * span, 0.8 * w), 0.45 * (1.0 - std::abs(y.s)));
                const double se = static_cast<double>(edge);
                const PlanarPoint dirdown{-mu * se, -se};
                const PlanarPoint v1{anchor.r - w, se};
                const PlanarPoint v2{anchor.r + w, se};
                const PlanarPoint v3 = add(v2, scale(dirdown, depth));
                const PlanarPoint v4 = add(v1, scale(dirdown, depth));
                double diam = 0.0;
                for (const auto& pa : {v1, v2, v3, v4})
                    for (const auto& pb : {v1, v2, v3, v4})
                        diam = std::max(diam, euclidean_distance(pa, pb));
                const bool inside = std::abs(v3.r) < 1.0 && std::abs(v4.r) < 1.0 &&
                                    std::abs(v3.s) < 1.0 && std::abs(v4.s) < 1.0 &&
                                    std::abs(v1.r) < 1.0 && std::abs(v2.r) < 1.0;
                const bool strip_ok = std::abs(v1.r - beta) < 2.0 * delta &&
                                      std::abs(v2.r - beta) < 2.0 * delta &&
                                      std::abs(v3.r - beta) < 2.0 * delta &&
                                      std::abs(v4.r - beta) < 2.0 * delta;
                if (inside && strip_ok && diam < 1.5 * cable_len) {
                    HangingSet hs;
                    hs.edge = edge;
                    hs.tree.vertices = {anchor, y};
                    hs.tree.edges = {{0, 1}};
                    hs.base_vertex = 0;
                    hs.floating_vertices = {1};
                    pt.hutch = make_hutch({v1, v2, v3, v4}, hs);
                    built = true;
                }
                if (!built) {
                    w *= 0.66;
                    dm *= 0.66;
                }
            }
            if (!built)
                throw PlacementError("placement error: could not fit a hutch around a cable");
            placed[ti] = pt;
        }
    }

    for (std::size_t i = 0; i < placed.size(); ++i) {
        for (std::size_t j = i + 1; j < placed.size(); ++j) {
            if (!polygons_disjoint(placed[i].hutch.disc, placed[j].hutch.disc)) {
                std::ostringstream os;
                os << "margin error: hutches of targets " << i << " and " << j
                   << " are not disjoint";
                throw MarginError(os.str());
            }
        }
    }
    return placed;
}

// --- axiom verification ------------------------------------------------------------

PermeatingAxioms verify_permeating_axioms(const Permeating& p, int boundary_samples,
                                          int arc_samples, int interior_samples, Exec exec) {
    PermeatingAxioms rep;
    rep.cap_chord_dev = p.wall_offset_deviation();
    const auto& hutch = p.hutch();
    const auto& pts = hutch.disc.boundary.pts;
    const double se = static_cast<double>(hutch.edge);

    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[i + 1];
        if (a.s == se && b.s == se) continue;
        const int steps = std::max(2, boundary_samples / static_cast<int>(pts.size()));
        for (int k = 0; k <= steps; ++k) {
            const double t = static_cast<double>(k) / steps;
            const PlanarPoint q = k == 0 ? a
                                 : k == steps
                                     ? b
                                     : PlanarPoint{a.r + t * (b.r - a.r), a.s + t * (b.s - a.s)};
            if (q.s == se && q.r > p.base_arc().lo && q.r < p.base_arc().hi) continue;
            rep.boundary_identity_dev =
                std::max(rep.boundary_identity_dev, euclidean_distance(q, p.forward(q)));
        }
    }

    PointCloud tree_cloud;
    {
        const auto& T = hutch.hanging.tree;
        for (const auto& [u, v] : T.edges) {
            const int steps = 200;
            for (int k = 0; k <= steps; ++k) {
                const double t = static_cast<double>(k) / steps;
                tree_cloud.push({T.vertices[u].r + t * (T.vertices[v].r - T.vertices[u].r),
                                 T.vertices[u].s + t * (T.vertices[v].s - T.vertices[u].s)});
            }
        }
    }
    {
        PointCloud img;
        const Segment1D Ap = p.marked_arc();
        for (int k = 0; k <= arc_samples; ++k) {
            const double r = Ap.lo + (Ap.hi - Ap.lo) * k / arc_samples;
            img.push(p.forward({r, se}));
        }
        // images measured against the exact tree; tree coverage against
        // the image cloud
        double worst = 0.0;
        for (const auto& q : img.pts)
            worst = std::max(worst, hutch.hanging.tree.distance_to(q));
        rep.marked_to_tree = std::max(worst, directed_hausdorff(tree_cloud, img, exec));
    }

    {
        PointCloud yc;
        const auto& T = hutch.hanging.tree;
        bool any = false;
        for (const auto& [u, v] : T.edges) {
            if (hutch.hanging.vertex_is_floating(u) && hutch.hanging.vertex_is_floating(v)) {
                any = true;
                for (int k = 0; k <= 100; ++k) {
                    const double t = static_cast<double>(k) / 100;
                    yc.push({T.vertices[u].r + t * (T.vertices[v].r - T.vertices[u].r),
                             T.vertices[u].s + t * (T.vertices[v].s - T.vertices[u].s)});
                }
            }
        }
        for (int fv : hutch.hanging.floating_vertices) {
            yc.push(T.vertices[static_cast<std::size_t>(fv)]);
            any = true;
        }
        if (any) {
            PointCloud img;
            const Segment1D App = p.floating_arc();
            for (int k = 0; k <= arc_samples; ++k) {
                const double r = App.lo + (App.hi - App.lo) * k / arc_samples;
                img.push(p.forward({r, se}));
            }
            PLTree ypart;
            std::map<int, int> remap;
            for (int fv : hutch.hanging.floating_vertices) {
                remap[fv] = static_cast<int>(ypart.vertices.size());
                ypart.vertices.push_back(T.vertices[static_cast<std::size_t>(fv)]);
            }
            for (const auto& [u, v] : T.edges)
                if (remap.count(u) && remap.count(v)) ypart.edges.push_back({remap[u], remap[v]});
            double worst = 0.0;
            for (const auto& q : img.pts) worst = std::max(worst, ypart.distance_to(q));
            rep.floating_cover = std::max(worst, directed_hausdorff(yc, img, exec));
        }
    }

    {
        // eta(A) = A union X; the marked arc is sampled at its own density
        // since the collapse stretches it over the whole hanging set
        PointCloud img, ref = tree_cloud;
        const Segment1D A = p.base_arc();
        const Segment1D Ap = p.marked_arc();
        for (int k = 0; k <= arc_samples; ++k) {
            const double r = A.lo + (A.hi - A.lo) * k / arc_samples;
            img.push(p.forward({r, se}));
            ref.push({r, se});
        }
        for (int k = 0; k <= arc_samples; ++k) {
            const double r = Ap.lo + (Ap.hi - Ap.lo) * k / arc_samples;
            img.push(p.forward({r, se}));
        }
        const PlanarPoint a_lo{A.lo, se}, a_hi{A.hi, se};
        double worst = 0.0;
        for (const auto& q : img.pts) {
            const double d = std::min(hutch.hanging.tree.distance_to(q),
                                      point_segment_distance(q, a_lo, a_hi));
            worst = std::max(worst, d);
        }
        rep.base_cover = std::max(worst, directed_hausdorff(ref, img, exec));
    }

    {
        const Segment1D A = p.base_arc();
        const Segment1D Ap = p.marked_arc();
        const auto base_pt =
            hutch.hanging.tree.vertices[static_cast<std::size_t>(hutch.hanging.base_vertex)];
        for (const auto& side : {std::pair<double, double>{A.lo, Ap.lo},
                                 std::pair<double, double>{Ap.hi, A.hi}}) {
            double prev = -2.0;
            for (int k = 0; k <= 500; ++k) {
                const double r = side.first + (side.second - side.first) * k / 500.0;
                const PlanarPoint img = p.forward({r, se});
                rep.unmarked_dev = std::max(rep.unmarked_dev, std::abs(img.s - se));
                if (k > 0 && img.r <= prev) rep.unmarked_monotone = false;
                prev = img.r;
                const double lo = side.first == A.lo ? A.lo : base_pt.r;
                const double hi = side.first == A.lo ? base_pt.r : A.hi;
                if (img.r < lo - 1e-9 || img.r > hi + 1e-9)
                    rep.unmarked_dev = std::max(rep.unmarked_dev, 1.0);
            }
        }
    }

    {
        std::vector<PlanarPoint> samples;
        samples.reserve(static_cast<std::size_t>(interior_samples));
        const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(interior_samples))));
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
        for (const auto& q : pts) {
            x0 = std::min(x0, q.r);
            x1 = std::max(x1, q.r);
            y0 = std::min(y0, q.s);
            y1 = std::max(y1, q.s);
        }
        for (int i = 0; i < side; ++i) {
            for (int j = 0; j < side; ++j) {
                const PlanarPoint q{x0 + (x1 - x0) * (i + 0.5) / side,
                                    y0 + (y1 - y0) * (j + 0.5) / side};
                if (point_in_disc(q, hutch.disc) == DiscLocation::Inside) samples.push_back(q);
            }
        }
        const auto images = map_indexed<PlanarPoint>(
            samples.size(), exec, [&](std::size_t i) { return p.forward(samples[i]); });
        double clearance = 1e300;
        for (const auto& q : images)
            clearance = std::min(clearance, hutch.hanging.tree.distance_to(q));
        rep.image_tree_clearance = clearance;

        double mind = 1e300;
        const double cell = std::max(1e-12, std::sqrt(((x1 - x0) * (y1 - y0)) /
                                                      std::max<std::size_t>(1, images.size())));
        std::map<std::pair<long long, long long>, std::vector<std::size_t>> grid;
        for (std::size_t i = 0; i < images.size(); ++i) {
            grid[{static_cast<long long>(std::floor(images[i].r / cell)),
                  static_cast<long long>(std::floor(images[i].s / cell))}]
                .push_back(i);
        }
        for (std::size_t i = 0; i < images.size(); ++i) {
            const long long gi = static_cast<long long>(std::floor(images[i].r / cell));
            const long long gj = static_cast<long long>(std::floor(images[i].s / cell));
            for (long long a = gi - 1; a <= gi + 1; ++a) {
                for (long long b = gj - 1; b <= gj + 1; ++b) {
                    const auto it = grid.find({a, b});
                    if (it == grid.end()) continue;
                    for (std::size_t j : it->second) {
                        if (j <= i) continue;
                        mind = std::min(mind, euclidean_distance(images[i], images[j]));
                    }
                }
            }
        }
        rep.interior_collision = mind;

        // surjectivity proxy: forward images of a mesh-scaled probe grid
        // (plus a dense mouth strip feeding the dug region) cover the
        // hutch away from the hanging set
        std::vector<PlanarPoint> cover(images.begin(), images.end());
        {
            const double pitch = std::max(p.mesh_h() / 2.0, (x1 - x0) / 700.0);
            const int pnx = static_cast<int>((x1 - x0) / pitch) + 1;
            const int pny = static_cast<int>((y1 - y0) / pitch) + 1;
            std::vector<PlanarPoint> probes;
            for (int i = 0; i < pnx; ++i)
                for (int j = 0; j < pny; ++j) {
                    const PlanarPoint q{x0 + (x1 - x0) * (i + 0.5) / pnx,
                                        y0 + (y1 - y0) * (j + 0.5) / pny};
                    if (point_in_disc(q, hutch.disc) == DiscLocation::Inside) probes.push_back(q);
                }
            const auto pushed = map_indexed<PlanarPoint>(
                probes.size(), exec, [&](std::size_t i) { return p.forward(probes[i]); });
            cover.insert(cover.end(), pushed.begin(), pushed.end());
        }
        const Segment1D Ap = p.marked_arc();
        for (int k = 0; k <= 4000; ++k) {
            const double r = Ap.lo + (Ap.hi - Ap.lo) * k / 4000.0;
            for (double depth : {0.0, 0.3, 1.0, 2.0, 4.0}) {
                const PlanarPoint q{r, se - se * depth * p.mesh_h() * 0.45};
                if (point_in_disc(q, hutch.disc) != DiscLocation::Outside)
                    cover.push_back(p.forward(q));
            }
        }
        // hashed nearest-cover query
        const double hcell = p.mesh_h();
        std::map<std::pair<long long, long long>, std::vector<std::size_t>> cgrid;
        for (std::size_t i = 0; i < cover.size(); ++i)
            cgrid[{static_cast<long long>(std::floor(cover[i].r / hcell)),
                   static_cast<long long>(std::floor(cover[i].s / hcell))}]
                .push_back(i);
        const auto nearest_cover = [&](const PlanarPoint& q) {
            const long long gi = static_cast<long long>(std::floor(q.r / hcell));
            const long long gj = static_cast<long long>(std::floor(q.s / hcell));
            double best = 1e300;
            for (long long ring = 0; ring < 64; ++ring) {
                for (long long a = gi - ring; a <= gi + ring; ++a) {
                    for (long long b = gj - ring; b <= gj + ring; ++b) {
                        if (std::max(std::llabs(a - gi), std::llabs(b - gj)) != ring) continue;
                        const auto it = cgrid.find({a, b});
                        if (it == cgrid.end()) continue;
                        for (std::size_t i : it->second)
                            best = std::min(best, euclidean_distance(cover[i], q));
                    }
                }
                if (best < static_cast<double>(ring) * hcell) break;
            }
            return best;
        };
        double worst = 0.0;
        const int gn = 50;
        for (int i = 0; i < gn; ++i) {
            for (int j = 0; j < gn; ++j) {
                const PlanarPoint q{x0 + (x1 - x0) * (i + 0.5) / gn,
                                    y0 + (y1 - y0) * (j + 0.5) / gn};
                if (point_in_disc(q, hutch.disc) != DiscLocation::Inside) continue;
                if (hutch.hanging.tree.distance_to(q) <= 2.0 * p.mesh_h()) continue;
                worst = std::max(worst, nearest_cover(q));
            }
        }
        rep.surjectivity_cover = worst;

        double rt = 0.0;
        int used = 0;
        for (const auto& q : samples) {
            if (hutch.hanging.tree.distance_to(q) <= p.mesh_h()) continue;
            if (++used > 1000) break;
            const PlanarPoint back = p.forward(p.inverse(q));
            rt = std::max(rt, euclidean_distance(back, q));
        }
        rep.roundtrip_max = rt;
    }

    return rep;
}

}  // namespace sqdyn
