#include <doctest.h>

#include <cmath>

#include "fpoc/error.hpp"
#include "fpoc/mesh.hpp"
#include "support.hpp"

using namespace fpoc;
using fpoc::testing::line;
using fpoc::testing::square;

TEST_CASE("cell centres of a four-cell line") {
    const auto g = line(4);
    CHECK(g->step(0) == 0.5);
    const double expected[] = {-0.75, -0.25, 0.25, 0.75};
    for (int i = 0; i < 4; ++i) CHECK(g->center(0, i) == expected[i]);
    CHECK(g->size() == 4);
    CHECK(g->cell_volume() == 0.5);
}

TEST_CASE("contacts axis with two cells") {
    const auto g = line(2, 1.0, 40.0);
    CHECK(g->step(0) == 19.5);
    CHECK(g->center(0, 0) == 10.75);
    CHECK(g->center(0, 1) == 30.25);
}

TEST_CASE("tensor grid of 2x2 cells") {
    const auto g = square(2, 2);
    REQUIRE(g->size() == 4);
    CHECK(g->point(0) == Point{-0.5, -0.5});
    CHECK(g->point(1) == Point{0.5, -0.5});
    CHECK(g->point(2) == Point{-0.5, 0.5});
    CHECK(g->point(3) == Point{0.5, 0.5});
    CHECK(g->index(1, 1) == 3);
    CHECK(g->interface_point(1, 0, 0) == Point{-0.5, 0.0});
}

TEST_CASE("centres stay interior and follow the formula to two ulps") {
    for (int n : {2, 3, 17, 1024}) {
        const auto g = line(n, -1.3, 2.9);
        CHECK(g->center(0, 0) > -1.3);
        CHECK(g->center(0, n - 1) < 2.9);
        const double h = 4.2 / n;
        for (int i = 0; i < n; ++i) {
            const double exact = -1.3 + h * (i + 0.5);
            CHECK(std::abs(g->center(0, i) - exact) <= 2.0 * std::numeric_limits<double>::epsilon() * 3.0);
        }
    }
}

TEST_CASE("grid construction rejects bad input") {
    CHECK_THROWS_AS(line(1), InvalidArgument);
    CHECK_THROWS_AS(line(4, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(Domain(std::vector<Interval>{}), InvalidArgument);
    const int exps[] = {0};
    CHECK_THROWS_AS(build_grid_exponents(Domain({Interval{-1.0, 1.0}}), exps), InvalidArgument);
}

TEST_CASE("exponent counts") {
    const int exps[] = {3, 5};
    const auto g = build_grid_exponents(Domain({Interval{-1.0, 1.0}, Interval{1.0, 40.0}}), exps);
    CHECK(g->count(0) == 8);
    CHECK(g->count(1) == 32);
}

TEST_CASE("time grid step count") {
    const TimeGrid t(4.0, 0.0125);
    CHECK(t.steps() == 320);
    CHECK(t.time(t.steps()) >= 4.0 - 1e-12);
    const TimeGrid odd(1.0, 0.3);
    CHECK(odd.steps() == 4);
    CHECK(odd.time(4) >= 1.0);
    CHECK_THROWS_AS(TimeGrid(0.0, 0.1), InvalidArgument);
    CHECK_THROWS_AS(TimeGrid(1.0, -0.1), InvalidArgument);
}

TEST_CASE("suggested time step") {
    CHECK(suggest_dt(*square(20, 20), 1.0) == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(suggest_dt(*line(4), 2.0) == 0.25);
    CHECK(suggest_dt(*square(20, 10), 4.0, 0.5) == doctest::Approx(0.5 * 0.02 / (4.0 * 0.3)).epsilon(1e-14));
    CHECK_THROWS_AS(suggest_dt(*line(4), 0.0), InvalidArgument);
}

TEST_CASE("suggested step is homogeneous in kappa") {
    const auto g = square(32, 8, {-1.0, 1.0}, {1.0, 40.0});
    for (double kappa : {0.3, 1.0, 7.5}) CHECK(suggest_dt(*g, 2.0 * kappa) == suggest_dt(*g, kappa) / 2.0);
}

TEST_CASE("semi-Lagrangian compatibility ratio") {
    const double T = 2.0;
    const double dv = 0.05;
    CHECK(sl_compatibility_ratio(1.0, std::pow(T, 2.0 / 3.0) * std::pow(dv, 2.0 / 3.0), dv, T) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sl_compatibility_ratio(0.01, 0.01, 0.01, 1.0) == doctest::Approx(4.641588833612779e-2).epsilon(1e-12));
    CHECK(sl_compatibility_ratio(0.01, 1e-12, 0.01, 1.0) < 1e-10);
    CHECK_THROWS_AS(sl_compatibility_ratio(0.0, 0.1, 0.1, 1.0), InvalidArgument);
}
