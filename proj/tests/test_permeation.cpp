#include <doctest.h>

#include <cmath>

#include "sqdyn/permeation.hpp"

using namespace sqdyn;

namespace {

// straight segment from (0,1) down to (0, 0.5) hanging on the top edge
Hutch segment_hutch() {
    HangingSet hs;
    hs.edge = 1;
    hs.tree.vertices = {{0.0, 1.0}, {0.0, 0.5}};
    hs.tree.edges = {{0, 1}};
    hs.base_vertex = 0;
    hs.floating_vertices = {1};
    return make_hutch({{-0.4, 1.0}, {-0.4, 0.2}, {0.4, 0.2}, {0.4, 1.0}}, hs);
}

// 3-star hanging from the top edge: stem plus two lower arms
Hutch star_hutch() {
    HangingSet hs;
    hs.edge = 1;
    hs.tree.vertices = {{0.0, 1.0}, {0.0, 0.6}, {-0.28, 0.42}, {0.26, 0.38}};
    hs.tree.edges = {{0, 1}, {1, 2}, {1, 3}};
    hs.base_vertex = 0;
    return make_hutch({{-0.6, 1.0}, {-0.6, 0.1}, {0.6, 0.1}, {0.6, 1.0}}, hs);
}

}  // namespace

TEST_CASE("hanging set validation") {
    HangingSet hs;
    hs.edge = 1;
    hs.tree.vertices = {{0.0, 1.0}, {0.0, 0.5}};
    hs.tree.edges = {{0, 1}};
    hs.base_vertex = 0;
    CHECK_NOTHROW(hs.validate());

    SUBCASE("non-tree rejected") {
        HangingSet bad = hs;
        bad.tree.vertices.push_back({0.2, 0.7});
        bad.tree.edges.push_back({0, 2});
        bad.tree.edges.push_back({1, 2});
        CHECK_THROWS_AS(bad.validate(), InvalidInputError);
    }
    SUBCASE("base off the edge rejected") {
        HangingSet bad = hs;
        bad.tree.vertices[0] = {0.0, 0.9};
        CHECK_THROWS_AS(bad.validate(), InvalidInputError);
    }
}

TEST_CASE("permeating on a straight segment") {
    const auto perm = build_tree_permeating(segment_hutch(), 0.01);

    SUBCASE("boundary identity off the base arc, exact") {
        const PlanarPoint q{0.4, 0.6};
        CHECK(perm->forward(q) == q);
        const PlanarPoint q2{-0.4, 0.3};
        CHECK(perm->forward(q2) == q2);
        const PlanarPoint q3{0.1, 0.2};
        CHECK(perm->forward(q3) == q3);
    }

    SUBCASE("marked arc collapses onto the segment") {
        const Segment1D Ap = perm->marked_arc();
        CHECK(Ap.lo < 0.0);
        CHECK(Ap.hi > 0.0);
        double worst = 0.0;
        for (int k = 0; k <= 2000; ++k) {
            const double r = Ap.lo + (Ap.hi - Ap.lo) * k / 2000.0;
            const PlanarPoint img = perm->forward({r, 1.0});
            // image on the segment r=0, s in [0.5, 1]
            worst = std::max(worst, std::abs(img.r));
            CHECK(img.s >= 0.5 - 0.011);
            CHECK(img.s <= 1.0 + 1e-12);
        }
        CHECK(worst < 0.011);
    }

    SUBCASE("floating arc covers the leaf point") {
        const Segment1D App = perm->floating_arc();
        CHECK(App.length() > 0.0);
        for (int k = 0; k <= 50; ++k) {
            const double r = App.lo + (App.hi - App.lo) * k / 50.0;
            const PlanarPoint img = perm->forward({r, 1.0});
            CHECK(euclidean_distance(img, {0.0, 0.5}) < 0.011);
        }
    }

    SUBCASE("axioms suite") {
        const auto rep = verify_permeating_axioms(*perm, 200, 2000, 4000);
        CHECK(rep.boundary_identity_dev == 0.0);
        CHECK(rep.marked_to_tree < 0.01);
        CHECK(rep.floating_cover < 0.011);
        CHECK(rep.base_cover < 0.01);
        CHECK(rep.unmarked_monotone);
        CHECK(rep.unmarked_dev < 1e-9);
        CHECK(rep.interior_collision > 1e-9);
        CHECK(rep.image_tree_clearance > 0.0);
        CHECK(rep.surjectivity_cover < 0.02);
        CHECK(rep.roundtrip_max < 1e-7);
    }

    SUBCASE("inverse round trip away from the hanging set") {
        const auto xi = build_compositive({perm});
        int tested = 0;
        for (double r = -0.38; r <= 0.38; r += 0.031) {
            for (double s = 0.22; s <= 0.98; s += 0.047) {
                const PlanarPoint q{r, s};
                if (xi->distance_to_exceptional(q) <= 0.012) continue;
                const PlanarPoint back = xi->forward(xi->inverse(q));
                CHECK(euclidean_distance(back, q) < 1e-7);
                ++tested;
            }
        }
        CHECK(tested > 100);
    }

    SUBCASE("inverse errors near the hanging set") {
        const auto xi = build_compositive({perm});
        CHECK_THROWS_AS(xi->inverse({0.0, 0.7}), NearSingularError);
        CHECK_THROWS_AS(xi->inverse({0.5, 1.0}), NearSingularError);
    }
}

TEST_CASE("compositive permeating") {
    const auto top = build_tree_permeating(segment_hutch(), 0.01);

    HangingSet hs2;
    hs2.edge = -1;
    hs2.tree.vertices = {{0.5, -1.0}, {0.5, -0.55}};
    hs2.tree.edges = {{0, 1}};
    hs2.base_vertex = 0;
    hs2.floating_vertices = {1};
    const auto bottom = build_tree_permeating(
        make_hutch({{0.2, -1.0}, {0.8, -1.0}, {0.8, -0.3}, {0.2, -0.3}}, hs2), 0.01);

    SUBCASE("empty family is the identity") {
        const auto xi = build_compositive({});
        const PlanarPoint q{0.3, -0.3};
        CHECK(xi->forward(q) == q);
    }

    SUBCASE("identity outside all hutches") {
        const auto xi = build_compositive({top, bottom});
        const PlanarPoint q{0.9, -0.9};
        CHECK(eval_permeating_forward(*xi, q) == q);
        const PlanarPoint q2{-0.9, 0.0};
        CHECK(eval_permeating_forward(*xi, q2) == q2);
    }

    SUBCASE("members evaluated pointwise inside their hutches") {
        const auto xi = build_compositive({top, bottom});
        const PlanarPoint a{0.1, 0.5};
        CHECK(eval_permeating_forward(*xi, a) == top->forward(a));
        const PlanarPoint b{0.5, -0.6};
        CHECK(eval_permeating_forward(*xi, b) == bottom->forward(b));
    }

    SUBCASE("overlapping hutches rejected with the pair named") {
        try {
            auto xi = build_compositive({top, top});
            CHECK(false);
        } catch (const InvalidInputError& e) {
            CHECK(std::string(e.what()).find("0") != std::string::npos);
            CHECK(std::string(e.what()).find("1") != std::string::npos);
        }
    }

    SUBCASE("exceptional set membership") {
        const auto xi = build_compositive({top, bottom});
        CHECK(xi->on_exceptional_set({0.0, 0.75}));   // on the top segment
        CHECK(xi->on_exceptional_set({0.5, -0.8}));   // on the bottom segment
        CHECK(xi->on_exceptional_set({0.3, 1.0}));    // top edge
        CHECK_FALSE(xi->on_exceptional_set({0.3, 0.0}));
    }
}

TEST_CASE("three-star permeating satisfies the axioms at two resolutions") {
    // sampling density scales with the resolution so the measured
    // discrepancies track the mesh, not the sample spacing
    const auto coarse = build_tree_permeating(star_hutch(), 0.01);
    const auto fine = build_tree_permeating(star_hutch(), 0.005);
    const auto rc = verify_permeating_axioms(*coarse, 100, 2000, 4000);
    const auto rf = verify_permeating_axioms(*fine, 100, 4000, 4000);
    CHECK(rc.boundary_identity_dev == 0.0);
    CHECK(rf.boundary_identity_dev == 0.0);
    CHECK(rc.marked_to_tree < 0.01);
    CHECK(rf.marked_to_tree < 0.005);
    CHECK(rc.interior_collision > 1e-9);
    CHECK(rc.image_tree_clearance > 0.0);
    CHECK(rc.surjectivity_cover < 2.0 * 0.01);
    CHECK(rf.surjectivity_cover < 2.0 * 0.005);
    // discrepancies shrink under refinement
    CHECK(rf.cap_chord_dev <= rc.cap_chord_dev / 1.5);
    CHECK(rf.marked_to_tree <= std::max(rc.marked_to_tree / 1.5, 1e-9));
    CHECK(rf.base_cover <= std::max(rc.base_cover / 1.5, 1e-9));
    CHECK(rf.roundtrip_max <= std::max(rc.roundtrip_max / 1.5, 1e-8));
}

TEST_CASE("cable and hutch placement") {
    DyadicEnumeration W(3);
    std::vector<std::pair<PlanarPoint, int>> targets = {
        {{0.2, 0.9}, 1},  {{0.2, -0.9}, -1},  {{-0.4, 0.95}, 1},
        {{-0.4, -0.95}, -1}, {{0.62, 0.85}, 1}, {{0.55, -0.88}, -1}};
    PlacementParams params;
    params.avoid_prefix = 3000;
    const auto placed = place_cables_and_hutches(targets, W, params);
    REQUIRE(placed.size() == targets.size());

    SUBCASE("cable slopes are exactly 1/mu") {
        for (const auto& p : placed) {
            const double dr = p.anchor.r - p.point.r;
            const double ds = p.anchor.s - p.point.s;
            CHECK(dr / ds == doctest::Approx(p.mu).epsilon(1e-12));
        }
    }

    SUBCASE("hutches pairwise disjoint and sized by the cable") {
        for (std::size_t i = 0; i < placed.size(); ++i) {
            for (std::size_t j = i + 1; j < placed.size(); ++j) {
                CHECK(polygons_disjoint(placed[i].hutch.disc, placed[j].hutch.disc));
            }
            const double len = euclidean_distance(placed[i].point, placed[i].anchor);
            double diam = 0.0;
            const auto& pts = placed[i].hutch.disc.boundary.pts;
            for (std::size_t a = 0; a < pts.size(); ++a)
                for (std::size_t b = a + 1; b < pts.size(); ++b)
                    diam = std::max(diam, euclidean_distance(pts[a], pts[b]));
            CHECK(diam < 1.5 * len);
        }
    }

    SUBCASE("no W-prefix point lies on any cable") {
        for (const auto& p : placed) {
            for (int fam = 0; fam < W.families(); ++fam) {
                for (long long k = 0; k < 1000; ++k) {
                    CHECK(point_segment_distance(W.point(fam, k), p.point, p.anchor) > 1e-12);
                }
            }
        }
    }

    SUBCASE("permeatings build on the placed hutches") {
        for (const auto& p : placed) {
            const double h = std::min(0.01, recommended_mesh_h(p.hutch));
            const auto perm = build_tree_permeating(p.hutch, h);
            // the floating arc collapses onto the prescribed point
            const Segment1D App = perm->floating_arc();
            const double se = static_cast<double>(p.edge);
            for (int k = 0; k <= 20; ++k) {
                const double r = App.lo + (App.hi - App.lo) * k / 20.0;
                const PlanarPoint img = perm->forward({r, se});
                CHECK(euclidean_distance(img, p.point) < 1.2 * h);
            }
        }
    }

    SUBCASE("degenerate zero-length cable rejected") {
        CHECK_THROWS_AS(
            place_cables_and_hutches({{{0.2, 1.0 - 1e-9}, 1}}, W, params), InvalidInputError);
    }
}

TEST_CASE("resolution errors") {
    // channel too wide for the hutch
    HangingSet hs;
    hs.edge = 1;
    hs.tree.vertices = {{0.0, 1.0}, {0.0, 0.8}};
    hs.tree.edges = {{0, 1}};
    hs.base_vertex = 0;
    const auto hutch = make_hutch({{-0.05, 1.0}, {-0.05, 0.7}, {0.05, 0.7}, {0.05, 1.0}}, hs);
    CHECK_THROWS_AS(build_tree_permeating(hutch, 0.04), ResolutionError);
    CHECK_NOTHROW(build_tree_permeating(hutch, 0.008));
}
