#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "sqdyn/geometry.hpp"
#include "sqdyn/map_algebra.hpp"
#include "sqdyn/steering.hpp"

namespace sqdyn {

// Permeating maps: continuous surjections of a hutch disc that collapse a
// boundary sub-arc onto a hanging tree while mapping the open disc
// bijectively onto the disc minus the tree.
//
// Realization: dig-and-identify as two exact piecewise-affine stages.
//   stage 1: a mesh homeomorphism from the hutch D to the dug disc
//            D' = D minus a width-h sleeve around the tree (solved as a
//            convex-combination mesh into the convex hutch, inverted);
//   stage 2: a ruled collapse of the doubled sleeve boundary onto the tree,
//            identity beyond twice the sleeve width.

// A hanging set: a PL tree with exactly one vertex on the open horizontal
// edge (the base); optionally a designated floating part Y reached through a
// cable (the base-to-attachment path).
struct HangingSet {
    int edge = +1;        // +1: hangs on the top edge, -1: bottom
    PLTree tree;          // full hanging set X (cable included, if any)
    int base_vertex = 0;  // the unique vertex on the edge
    std::vector<int> floating_vertices;  // vertex ids of Y; empty: no cable case

    void validate() const;
    bool vertex_is_floating(int v) const;
};

struct Hutch {
    PolygonDisc disc;  // convex polygon; exactly one side lies on the edge
    int edge = +1;
    Segment1D base_arc;  // A = D intersect the edge (abscissa interval)
    HangingSet hanging;

    void validate() const;
};

// Builds the convex-polygon hutch record from raw vertices (the side on the
// edge is detected and becomes the base arc).
Hutch make_hutch(std::vector<PlanarPoint> polygon, HangingSet hanging);

// PL map given by a triangulation with per-vertex image positions.
struct TriMesh {
    std::vector<PlanarPoint> dom;
    std::vector<PlanarPoint> img;
    std::vector<std::array<int, 3>> tris;

    void build_index();
    // returns false when p is not in the mesh (beyond tolerance)
    bool eval(const PlanarPoint& p, PlanarPoint& out) const;

private:
    // uniform grid over the domain bbox
    double gx0_ = 0, gy0_ = 0, gcell_ = 1;
    int gnx_ = 1, gny_ = 1;
    std::vector<std::vector<int>> grid_;
};

// One wall sample of the offset contour around the tree.
struct WallPoint {
    PlanarPoint wall;    // point of the inner contour (distance ~h from the tree)
    PlanarPoint shadow;  // its collapse target on the tree
    PlanarPoint outer;   // the matching outer-contour point (ring width)
    bool floating = false;  // shadow lies on the floating part Y
};

class Permeating {
public:
    Permeating(Hutch hutch, double mesh_h);

    const Hutch& hutch() const { return hutch_; }
    double mesh_h() const { return mesh_h_; }
    Segment1D base_arc() const { return hutch_.base_arc; }
    Segment1D marked_arc() const { return marked_arc_; }      // A'
    Segment1D floating_arc() const { return floating_arc_; }  // A'' (= A' when no cable)
    const std::vector<WallPoint>& wall() const { return wall_; }

    PlanarPoint forward(const PlanarPoint& x) const;
    // defined away from the tree; callers at exceptional points use the
    // fixed-point convention in map_algebra instead
    PlanarPoint inverse(const PlanarPoint& y) const;

    double distance_to_hanging(const PlanarPoint& p) const;
    bool contains(const PlanarPoint& p) const;

    // largest deviation of the wall polyline from the exact distance-h
    // offset (chord error of the PL caps; scales with mesh_h)
    double wall_offset_deviation() const { return wall_dev_; }

private:
    void build();
    void build_walk();
    void build_ring();
    void build_stage1();
    PlanarPoint to_canonical(const PlanarPoint& p) const;
    PlanarPoint from_canonical(const PlanarPoint& p) const;

    Hutch hutch_;            // original orientation
    double mesh_h_;
    Segment1D marked_arc_;
    Segment1D floating_arc_;

    // canonical (top-edge) data
    PLTree tree_;                  // mirrored copy when edge == -1
    std::vector<PlanarPoint> poly_;  // hutch polygon, canonical, CCW, open
    std::vector<WallPoint> wall_;
    PlanarPoint mouth_left_, mouth_right_;
    std::vector<std::array<PlanarPoint, 3>> ring_dom_, ring_img_;
    TriMesh stage1_fwd_;  // D -> D'
    TriMesh stage1_inv_;  // D' -> D
    double wall_dev_ = 0.0;
};

using PermeatingPtr = std::shared_ptr<const Permeating>;

PermeatingPtr build_tree_permeating(const Hutch& hutch, double mesh_h);

// Largest channel width the hutch geometry accommodates (clearances between
// the hanging set, the hutch sides, and the base-arc mouth).
double recommended_mesh_h(const Hutch& hutch);

class CompositivePermeating {
public:
    explicit CompositivePermeating(std::vector<PermeatingPtr> members);

    const std::vector<PermeatingPtr>& members() const { return members_; }
    double max_hutch_diameter() const { return max_diameter_; }

    bool on_exceptional_set(const PlanarPoint& p, double tol = kExactTol) const;
    double distance_to_exceptional(const PlanarPoint& p) const;

    PlanarPoint forward(const PlanarPoint& x) const;
    PlanarPoint inverse(const PlanarPoint& y) const;  // guarded near the exceptional set

private:
    std::vector<PermeatingPtr> members_;
    double max_diameter_ = 0.0;
};

using CompositivePtr = std::shared_ptr<const CompositivePermeating>;

CompositivePtr build_compositive(std::vector<PermeatingPtr> members);
MapExpr permeating_expr(CompositivePtr xi);

PlanarPoint eval_permeating_forward(const CompositivePermeating& xi, const PlanarPoint& x);
PlanarPoint eval_permeating_inverse(const CompositivePermeating& xi, const PlanarPoint& x);

// --- cable and hutch placement ------------------------------------------------

struct PlacedTarget {
    PlanarPoint point;   // the prescribed limit point
    int edge = +1;       // +1: omega target (cable to the top), -1: alpha target
    PlanarPoint anchor;  // cable endpoint on the edge
    double mu = 0.0;     // cable tilt; slope is 1/mu
    Hutch hutch;
};

struct PlacementParams {
    double delta_fraction = 0.19;   // delta_beta as a fraction of the free gap
    double depth_margin = 0.04;     // hutch extension beyond the target
    long long avoid_prefix = 10000; // W points checked against the cables
    int mu_scan_depth = 40;
};

// Straight cables of slope 1/mu from each target to its edge, tilt chosen to
// avoid the enumerated W prefix; pairwise disjoint convex hutches around the
// cables.
std::vector<PlacedTarget> place_cables_and_hutches(
    const std::vector<std::pair<PlanarPoint, int>>& targets, const PointEnumeration& W,
    const PlacementParams& params = {});

// --- axiom verification --------------------------------------------------------

struct PermeatingAxioms {
    double boundary_identity_dev = 0.0;   // on sampled boundary off the base arc
    double marked_to_tree = 0.0;          // Hausdorff(eta(A' samples), X)
    double floating_cover = 0.0;          // Hausdorff(eta(A'' samples), Y)
    double base_cover = 0.0;              // Hausdorff(eta(A samples), A union X)
    double unmarked_dev = 0.0;            // eta(A - A') against A minus the base point
    bool unmarked_monotone = true;
    double interior_collision = 0.0;      // min pairwise distance of interior images
    double image_tree_clearance = 0.0;    // min d(eta(interior), X)
    double surjectivity_cover = 0.0;      // coverage of {d > 2h} by forward images
    double roundtrip_max = 0.0;           // forward(inverse(y)) error off the tree
    double cap_chord_dev = 0.0;           // PL wall vs exact offset (scales with h)
};

PermeatingAxioms verify_permeating_axioms(const Permeating& p, int boundary_samples = 400,
                                          int arc_samples = 4000, int interior_samples = 10000,
                                          Exec exec = Exec::Serial);

}  // namespace sqdyn
