#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fpoc/error.hpp"
#include "fpoc/fields.hpp"
#include "support.hpp"

using namespace fpoc;
using namespace fpoc::testing;

TEST_CASE("midpoint mass") {
    for (int n : {2, 7, 64}) CHECK(integrate(ScalarField(line(n), 0.5)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(integrate(ScalarField(line(8))) == 0.0);

    // Midpoint rule error for v^2 on [-1, 1] is (b - a) h^2 / 24 * f'' = h^2 / 6.
    const auto g = line(1024);
    const auto sq = ScalarField::sample(g, [](const Point& p) { return p[0] * p[0]; });
    const double h = g->step(0);
    CHECK(std::abs(integrate(sq) - 2.0 / 3.0) < 1e-5);
    CHECK(integrate(sq) == doctest::Approx(2.0 / 3.0 - h * h / 6.0).epsilon(1e-13));
}

TEST_CASE("mass in two dimensions") {
    const auto g = square(8, 4, {-1.0, 1.0}, {1.0, 40.0});
    CHECK(integrate(ScalarField(g, 1.0)) == doctest::Approx(78.0).epsilon(1e-14));
}

TEST_CASE("integrate is linear") {
    const auto g = square(5, 6);
    const auto a = random_field(g, 1);
    const auto b = random_field(g, 2);
    CHECK(integrate(2.5 * a + b) == doctest::Approx(2.5 * integrate(a) + integrate(b)).epsilon(1e-13));
}

TEST_CASE("normalised error metrics") {
    const auto g = line(16);
    const auto ref = ScalarField::sample(g, [](const Point& p) { return std::cos(p[0]) + 2.0; });
    const auto same = error_metrics(ref, ref);
    CHECK(same.e2 == 0.0);
    CHECK(same.einf == 0.0);

    const auto twice = error_metrics(2.0 * ref, ref);
    CHECK(twice.e2 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(twice.einf == doctest::Approx(1.0).epsilon(1e-15));

    const int m = 16;
    ScalarField bump(g, 1.0);
    bump[5] += 1.0;
    const auto e = error_metrics(bump, ScalarField(g, 1.0));
    CHECK(e.einf == 1.0);
    CHECK(e.e2 == doctest::Approx(1.0 / std::sqrt(m)).epsilon(1e-15));

    CHECK_THROWS_AS(error_metrics(ref, ScalarField(g)), InvalidArgument);
}

TEST_CASE("discrete gradient is exact on quadratics") {
    const auto g = line(9, -1.0, 2.0);
    const auto c = discrete_gradient(ScalarField(g, 3.0));
    CHECK(c[0].max_abs() == 0.0);

    const auto lin = discrete_gradient(ScalarField::sample(g, [](const Point& p) { return p[0]; }));
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(lin[0][i] == doctest::Approx(1.0).epsilon(1e-13));

    const auto quad = discrete_gradient(ScalarField::sample(g, [](const Point& p) { return p[0] * p[0]; }));
    for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(quad[0][i] == doctest::Approx(2.0 * g->point(i)[0]).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("discrete gradient in two dimensions") {
    const auto g = square(5, 4, {-1.0, 1.0}, {0.0, 3.0});
    const auto f = ScalarField::sample(g, [](const Point& p) { return p[0] * p[0] * p[1] + 3.0 * p[1] * p[1]; });
    const auto grad = discrete_gradient(f);
    REQUIRE(grad.dim() == 2);
    for (std::size_t idx = 0; idx < g->size(); ++idx) {
        const Point p = g->point(idx);
        CHECK(grad[0][idx] == doctest::Approx(2.0 * p[0] * p[1]).scale(1.0).epsilon(1e-12));
        CHECK(grad[1][idx] == doctest::Approx(p[0] * p[0] + 6.0 * p[1]).scale(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(discrete_gradient(ScalarField(line(2))), InvalidArgument);
}

TEST_CASE("space-time inner product") {
    const auto g = square(4, 4, {-1.0, 1.0}, {0.0, 2.0});
    const TimeGrid t(1.0, 0.25);
    ControlTrajectory a(t, VectorField(g, 1.0));
    // Trapezoid in time, midpoint in space, two components each contributing |Omega| T.
    CHECK(inner_product_spacetime(a, a) == doctest::Approx(2.0 * 4.0).epsilon(1e-14));

    ControlTrajectory left(t, VectorField(g));
    ControlTrajectory right(t, VectorField(g));
    for (int n = 0; n <= t.steps(); ++n) {
        left[n][0][0] = 1.0;
        right[n][0][1] = 1.0;
    }
    CHECK(inner_product_spacetime(left, right) == 0.0);

    const auto fine = line(8);
    const TimeGrid tt(1.0, 1e-3);
    ControlTrajectory ramp(tt, VectorField(fine));
    for (int n = 0; n <= tt.steps(); ++n) ramp[n][0] = ScalarField(fine, tt.time(n));
    CHECK(std::abs(inner_product_spacetime(ramp, ramp) - 2.0 / 3.0) < 1e-3);

    const TimeGrid other(1.0, 0.5);
    CHECK_THROWS_AS(inner_product_spacetime(a, ControlTrajectory(other, VectorField(g))), InvalidArgument);
}

TEST_CASE("field csv dump") {
    const auto g = square(2, 2);
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.1 * static_cast<double>(i);
    std::ostringstream os;
    write_field_csv(os, f);
    const std::string s = os.str();
    CHECK(s.rfind("v1,v2,value\n", 0) == 0);
    CHECK(s.find("0.5,0.5,0.30000000000000004") != std::string::npos);

    std::ostringstream one;
    write_field_csv(one, ScalarField(line(2), 0.5));
    CHECK(one.str() == "v,value\n-0.5,0.5\n0.5,0.5\n");
}

TEST_CASE("field arithmetic rejects mixed grids") {
    ScalarField a(line(4));
    CHECK_THROWS_AS(a += ScalarField(line(5)), InvalidArgument);
    CHECK_THROWS_AS(ScalarField(line(4), std::vector<double>(3)), InvalidArgument);
}
