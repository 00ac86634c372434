#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sqdyn/errors.hpp"
#include "sqdyn/parallel.hpp"

namespace sqdyn {

// Planar primitives for the closed square [-1,1]^2: points, 1-D segments,
// polylines, embedded trees, polygonal discs and finite point clouds.
// All types are immutable value types; all operations are pure.

inline constexpr double kSquareLo = -1.0;
inline constexpr double kSquareHi = 1.0;
inline constexpr double kGeomTol = 1e-9;   // incidence predicates
inline constexpr double kExactTol = 1e-12; // "exact" membership (on-set tests)

struct PlanarPoint {
    double r = 0.0;  // abscissa
    double s = 0.0;  // ordinate

    friend bool operator==(const PlanarPoint& a, const PlanarPoint& b) {
        return a.r == b.r && a.s == b.s;
    }
};

bool in_square(const PlanarPoint& p);
bool on_square_boundary(const PlanarPoint& p);
void require_in_square(const PlanarPoint& p, const char* who);

double euclidean_distance(const PlanarPoint& a, const PlanarPoint& b);

// Closed interval [lo, hi]; degenerate (lo == hi) stands for a point.
struct Segment1D {
    double lo = 0.0;
    double hi = 0.0;

    Segment1D() = default;
    Segment1D(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(lo <= hi)) throw InvalidInputError("Segment1D: lo > hi");
    }
    bool is_point() const { return lo == hi; }
    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
};

struct Polyline {
    std::vector<PlanarPoint> pts;

    double length() const;
    // distance from a point to the polyline (all segments)
    double distance_to(const PlanarPoint& p) const;
};

// sanity checks for an arc (>= 2 vertices, consecutive distinct, simple)
void validate_arc(const Polyline& pl);

double point_segment_distance(const PlanarPoint& p, const PlanarPoint& a, const PlanarPoint& b);

// true if the open segments (a,b) and (c,d) intersect; touching at shared
// endpoints does not count.
bool segments_cross(const PlanarPoint& a, const PlanarPoint& b,
                    const PlanarPoint& c, const PlanarPoint& d, double tol = kExactTol);

struct PLTree {
    std::vector<PlanarPoint> vertices;
    std::vector<std::pair<int, int>> edges;

    double total_length() const;
    double distance_to(const PlanarPoint& p) const;
    std::vector<int> neighbors(int v) const;
    int degree(int v) const { return static_cast<int>(neighbors(v).size()); }
};

struct TreeDiagnostics {
    bool connected = true;
    bool acyclic = true;
    bool planar_embedding = true;  // no two edges cross except at shared endpoints
    std::vector<std::pair<int, int>> crossing_pairs;  // offending edge indices
    std::string summary() const;
    bool valid() const { return connected && acyclic && planar_embedding; }
};

TreeDiagnostics validate_tree_embedding(const PLTree& t);

// Simple closed polygon (first vertex repeated last), positive area.
struct PolygonDisc {
    Polyline boundary;

    static PolygonDisc from_vertices(std::vector<PlanarPoint> verts);  // closes the loop
    double area() const;  // signed shoelace area of the stored orientation
    std::size_t num_vertices() const {
        return boundary.pts.empty() ? 0 : boundary.pts.size() - 1;
    }
    PlanarPoint vertex(std::size_t i) const { return boundary.pts[i]; }
    PlanarPoint centroid() const;
};

enum class DiscLocation { Inside, Boundary, Outside };

DiscLocation point_in_disc(const PlanarPoint& x, const PolygonDisc& d, double tol = kGeomTol);

// exact-ish separation test for convex or general simple polygons
bool polygons_disjoint(const PolygonDisc& a, const PolygonDisc& b);

struct PointCloud {
    std::vector<PlanarPoint> pts;

    bool empty() const { return pts.empty(); }
    std::size_t size() const { return pts.size(); }
    void push(const PlanarPoint& p) { pts.push_back(p); }
};

// inf-distance between nonempty clouds
double min_set_distance(const PointCloud& a, const PointCloud& b, Exec exec = Exec::Serial);

// symmetric Hausdorff distance between nonempty clouds
double hausdorff_distance(const PointCloud& a, const PointCloud& b, Exec exec = Exec::Serial);

// directed sup-inf distance (a -> b)
double directed_hausdorff(const PointCloud& a, const PointCloud& b, Exec exec = Exec::Serial);

}  // namespace sqdyn
