#include <doctest.h>

#include <cmath>
#include <set>

#include "sqdyn/steering.hpp"

using namespace sqdyn;

TEST_CASE("bump map basics") {
    // z != y inside a unit ball
    const BumpMap b = make_bump({0, 0}, {0.05, 0}, 1.0);
    const PlanarPoint img = b.forward({0, 0});
    CHECK(img.r == 0.05);
    CHECK(img.s == 0.0);
    // outside the ball: identity (d((0.9,0.9),(0,0)) ~ 1.27 > 1)
    const PlanarPoint far{0.9, 0.9};
    CHECK(b.forward(far) == far);
    // identity bump
    const BumpMap idb = make_bump({0.2, 0.2}, {0.2, 0.2}, 0.5);
    CHECK(idb.claimed_bilipschitz == 1.0);
    CHECK(idb.forward({0.25, 0.2}) == PlanarPoint{0.25, 0.2});

    CHECK_THROWS_AS(make_bump({0, 0}, {0.6, 0}, 0.5), InvalidInputError);
}

TEST_CASE("bump inverse is exact") {
    const BumpMap b = make_bump({0.1, -0.2}, {0.18, -0.13}, 0.4);
    for (double dr = -0.38; dr <= 0.38; dr += 0.037) {
        for (double ds = -0.38; ds <= 0.38; ds += 0.041) {
            const PlanarPoint x{0.1 + dr, -0.2 + ds};
            const PlanarPoint y = b.forward(x);
            CHECK(euclidean_distance(b.inverse(y), x) < 1e-10);
        }
    }
}

TEST_CASE("bump empirical bilipschitz stays under the recorded bound") {
    const BumpMap b = make_bump({0, 0}, {0.05, 0}, 1.0);
    const double est = bilipschitz_estimate(bump_expr(b), 1000, 99);
    CHECK(est <= b.claimed_bilipschitz + 1e-9);
}

TEST_CASE("budget schedules") {
    SteeringBudget budget;
    budget.lambda = 2.0;
    budget.eps = 0.2;
    budget.stages = 64;
    budget.validate();
    double sum = 0.0, prod = 1.0, prev_e = 1e300, prev_l = 1e300;
    for (int j = 1; j <= budget.stages; ++j) {
        const double e = budget.stage_eps(j);
        const double l = budget.stage_lambda(j);
        CHECK(e > 0.0);
        CHECK(l > 1.0);
        CHECK(e < prev_e);
        CHECK(l < prev_l);
        prev_e = e;
        prev_l = l;
        sum += e;
        prod *= l;
    }
    CHECK(sum < budget.eps);
    CHECK(prod < budget.lambda);
    CHECK(budget.running_eps(budget.stages) == doctest::Approx(sum).epsilon(1e-12));
    CHECK(budget.running_lambda(budget.stages) == doctest::Approx(prod).epsilon(1e-12));
    CHECK(budget.residual() == doctest::Approx(budget.eps - sum).epsilon(1e-9));
}

TEST_CASE("dyadic enumerations are interior, disjoint and searchable") {
    DyadicEnumeration en(3);
    std::set<std::pair<double, double>> seen;
    for (int fam = 0; fam < 3; ++fam) {
        for (long long i = 0; i < 600; ++i) {
            const PlanarPoint p = en.point(fam, i);
            CHECK(in_square(p));
            CHECK(std::abs(p.r) < 1.0);
            CHECK(std::abs(p.s) < 1.0);
            CHECK(seen.insert({p.r, p.s}).second);  // pairwise distinct
        }
    }
    // first_within returns the first enumerated point in the ball
    const PlanarPoint z{0.123, -0.456};
    for (double rad : {0.5, 0.1, 0.01, 1e-3, 1e-5}) {
        const long long ix = en.first_within(1, z, rad);
        REQUIRE(ix >= 0);
        CHECK(euclidean_distance(en.point(1, ix), z) < rad);
        // nothing earlier qualifies
        for (long long i = 0; i < std::min(ix, 4000LL); ++i)
            CHECK(euclidean_distance(en.point(1, i), z) >= rad);
    }
}

TEST_CASE("one-stage steering by hand") {
    ExplicitEnumeration V({{{0.0, 0.0}}});
    ExplicitEnumeration W({{{0.05, 0.0}, {0.5, 0.5}}});
    SteeringBudget budget;
    budget.lambda = 2.0;
    budget.eps = 0.2;
    budget.stages = 1;
    const SteeringResult res = build_steering(V, W, budget);
    REQUIRE(res.stages.size() == 1);
    CHECK(res.stages[0].tau == 1.0);
    const PlanarPoint img = res.eval({0.0, 0.0});
    CHECK(img.r == 0.05);
    CHECK(img.s == 0.0);
}

TEST_CASE("zero stages give the identity with full residual") {
    DyadicEnumeration V(2), W(2, 1);
    SteeringBudget budget;
    budget.stages = 0;
    const SteeringResult res = build_steering(V, W, budget);
    CHECK(res.residual_bound == budget.eps);
    const PlanarPoint x{0.3, -0.3};
    CHECK(res.eval(x) == x);
    const SteeringReport rep = verify_steering(res, 40, 300);
    CHECK(rep.boundary_identity);
    CHECK(rep.sup_displacement == 0.0);
    CHECK(rep.membership_ok);
}

TEST_CASE("stage monotonicity: later bumps do not disturb earlier targets") {
    DyadicEnumeration V(3), W(3, 1);
    SteeringBudget budget;
    budget.lambda = 2.0;
    budget.eps = 0.2;
    budget.stages = 24;
    const SteeringResult res = build_steering(V, W, budget);
    // replay prefix compositions: h_k(x_j) == h_j(x_j) for k > j
    for (std::size_t j = 0; j < res.stages.size(); ++j) {
        PlanarPoint p = res.stages[j].source;
        for (std::size_t k = 0; k < res.stages.size(); ++k) {
            p = res.stages[k].bump.forward(p);
            if (k == j) CHECK(p == res.stages[j].target);
        }
        CHECK(p == res.stages[j].target);
    }
}

TEST_CASE("full steering suite at moderate size") {
    DyadicEnumeration V(3), W(3, 1);
    SteeringBudget budget;
    budget.lambda = 2.0;
    budget.eps = 0.2;
    budget.stages = 32;
    const SteeringResult res = build_steering(V, W, budget);
    const SteeringReport rep = verify_steering(res, 60, 2000);
    CHECK(rep.boundary_identity);
    CHECK(rep.membership_ok);
    CHECK(rep.sup_displacement < budget.eps);
    CHECK(rep.empirical_bilipschitz < budget.lambda);

    SUBCASE("uniform Cauchy property of the stage sequence") {
        // displacement between h_k and h_{k+1} is at most the stage bound
        for (std::size_t k = 0; k < res.stages.size(); ++k) {
            const double disp = res.stages[k].bump.displacement();
            CHECK(disp < res.budget.stage_eps(static_cast<int>(k) + 1));
        }
    }

    SUBCASE("corrupted composition fails membership") {
        SteeringResult broken = res;
        broken.stages.pop_back();
        std::vector<MapExpr> parts;
        for (auto it = broken.stages.rbegin(); it != broken.stages.rend(); ++it)
            parts.push_back(bump_expr(it->bump));
        broken.h = compose(std::move(parts));
        broken.stages = res.stages;  // keep the full bookkeeping
        const SteeringReport bad = verify_steering(broken, 20, 300);
        CHECK_FALSE(bad.membership_ok);
        CHECK(bad.membership_failures >= 1);
    }
}

TEST_CASE("enumeration-depth error surfaces") {
    ExplicitEnumeration V({{{0.0, 0.0}, {0.5, 0.5}}});
    ExplicitEnumeration W({{{0.9, 0.9}}});  // nothing near the sources
    SteeringBudget budget;
    budget.stages = 1;
    CHECK_THROWS_AS(build_steering(V, W, budget), EnumerationDepthError);
}
