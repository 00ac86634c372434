#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "sqdyn/interval_maps.hpp"

using namespace sqdyn;

TEST_CASE("drift branch formulas") {
    CHECK(drift_eval(0.0) == 0.5);
    CHECK(drift_eval(-0.5) == 0.0);
    CHECK(drift_eval(-0.75) == -0.5);
    CHECK(drift_eval(-1.0) == -1.0);
    CHECK(drift_eval(1.0) == 1.0);
    CHECK_THROWS_AS(drift_eval(1.5), DomainError);
    CHECK_THROWS_AS(drift_eval(-2.0), DomainError);
}

TEST_CASE("drift iterates") {
    CHECK(drift_iterate(0.0, 3) == 0.875);
    CHECK(drift_iterate(0.0, 0) == 0.0);
    CHECK(drift_iterate(0.5, -1) == 0.0);
    // exact dyadic ladder: drift^n(0) = 1 - 2^-n to the last bit
    for (int n = 0; n <= 40; ++n) {
        CHECK(drift_iterate(0.0, n) == 1.0 - std::exp2(-n));
    }
}

TEST_CASE("drift as PL map matches the branch formulas exactly") {
    const PLHomeo1D pl = drift_as_pl();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double s = u(rng);
        CHECK(pl.eval(s) == drift_eval(s));
    }
}

TEST_CASE("drift is a bijection of J") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double s = u(rng);
        CHECK(std::abs(drift_eval_inverse(drift_eval(s)) - s) < 1e-12);
    }
}

TEST_CASE("monotone convergence toward the top, exact on dyadics") {
    for (double s : {0.0, 0.25, 0.5, 0.75, 0.9375}) {
        double x = s;
        for (int n = 1; n <= 40; ++n) {
            x = drift_eval(x);
            CHECK(1.0 - x == (1.0 - s) * std::exp2(-n));
        }
    }
}

TEST_CASE("ladder coordinate") {
    CHECK(to_ladder_coordinate(0.0).t == 0.0);
    CHECK(to_ladder_coordinate(0.5).t == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(to_ladder_coordinate(0.875).t == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(to_ladder_coordinate(0.5).upper);
    CHECK_FALSE(to_ladder_coordinate(-0.5).upper);
    CHECK_THROWS_AS(to_ladder_coordinate(1.0), DomainError);

    SUBCASE("drift acts as unit translation in the upper region") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 0.999);
        for (int i = 0; i < 5000; ++i) {
            const double s = u(rng);
            const double t0 = to_ladder_coordinate(s).t;
            const double t1 = to_ladder_coordinate(drift_eval(s)).t;
            CHECK(std::abs(t1 - (t0 + 1.0)) < 1e-9);
        }
    }
    SUBCASE("round trip within 1e-12") {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> u(0.0, 0.999);
        for (int i = 0; i < 2000; ++i) {
            const double s = u(rng);
            const double t = to_ladder_coordinate(s).t;
            CHECK(std::abs((1.0 - std::exp2(-t)) - s) < 1e-12);
        }
    }
}

TEST_CASE("global fiber time is the exact conjugacy") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.999, 0.999);
    for (int i = 0; i < 5000; ++i) {
        const double s = u(rng);
        const double t0 = fiber_time(s);
        const double t1 = fiber_time(drift_eval(s));
        CHECK(t1 - t0 == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(fiber_time_inverse(t0) - s) < 1e-11);
    }
    CHECK(fiber_time(0.0) == 0.0);
    CHECK(fiber_time(-0.5) == -1.0);
    CHECK(fiber_time_inverse(-1.0) == -0.5);
    CHECK(fiber_time_inverse(1.0) == 0.5);
}

TEST_CASE("ladder closure") {
    CHECK(ladder_closure({0.5}, 0, 2) == std::vector<double>{0.5, 0.75, 0.875});
    CHECK(ladder_closure({0.5}, 0, 0) == std::vector<double>{0.5});

    const auto six = ladder_closure({0.25, 0.5}, -1, 1);
    CHECK(six.size() == 6);
    std::set<double> uniq(six.begin(), six.end());
    CHECK(uniq.size() == 6);

    CHECK_THROWS_AS(ladder_closure({0.75}, 0, 1), InvalidInputError);
    CHECK_THROWS_AS(ladder_closure({0.0}, 0, 1), InvalidInputError);

    SUBCASE("closures of disjoint seeds stay pairwise disjoint") {
        const auto a = ladder_closure({0.11, 0.31}, -20, 20);
        const auto b = ladder_closure({0.17, 0.44}, -20, 20);
        for (double x : a)
            for (double y : b) CHECK(x != y);
    }
}

TEST_CASE("generic PL homeomorphism sanity") {
    const PLHomeo1D h({-1.0, 0.2, 1.0}, {-1.0, -0.3, 1.0});
    CHECK(h.eval(0.2) == -0.3);
    CHECK(h.eval(-1.0) == -1.0);
    CHECK(h.eval(1.0) == 1.0);
    CHECK(h.eval_inverse(-0.3) == 0.2);
    CHECK(h.inverse().eval(-0.3) == 0.2);
    CHECK(pl_iterate(h, 0.2, 2) == h.eval(-0.3));
    CHECK(pl_iterate(h, -0.3, -1) == 0.2);
    CHECK_THROWS_AS(PLHomeo1D({-1.0, 0.5, 0.4, 1.0}, {-1.0, 0.0, 0.5, 1.0}), InvalidInputError);
}
