#include <doctest.h>

#include <cmath>

#include "fpoc/backward.hpp"
#include "fpoc/error.hpp"
#include "fpoc/fields.hpp"
#include "support.hpp"

using namespace fpoc;
using namespace fpoc::testing;

TEST_CASE("quadrature stencil matches Gaussian moments") {
    for (int dim : {1, 2}) {
        CAPTURE(dim);
        const auto s = QuadratureStencil::for_dim(dim);
        CHECK(s.size() == (dim == 1 ? 3u : 9u));
        double m0 = 0.0;
        double m1[2] = {0.0, 0.0};
        double m2[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
        double m4 = 0.0;
        for (std::size_t l = 0; l < s.size(); ++l) {
            const double w = s.weights[l];
            m0 += w;
            m4 += w * std::pow(s.offsets[l][0], 4);
            for (int a = 0; a < dim; ++a) {
                m1[a] += w * s.offsets[l][static_cast<std::size_t>(a)];
                for (int b = 0; b < dim; ++b) {
                    m2[a][b] += w * s.offsets[l][static_cast<std::size_t>(a)] * s.offsets[l][static_cast<std::size_t>(b)];
                }
            }
        }
        CHECK(std::abs(m0 - 1.0) < 1e-15);
        CHECK(std::abs(m4 - 3.0) < 1e-14);
        for (int a = 0; a < dim; ++a) {
            CHECK(std::abs(m1[a]) < 1e-15);
            for (int b = 0; b < dim; ++b) CHECK(std::abs(m2[a][b] - (a == b ? 1.0 : 0.0)) < 1e-15);
        }
    }
}

TEST_CASE("reflection at the boundary") {
    const Domain line_dom({Interval{-1.0, 1.0}});
    const ReflectionRule rule{1.0};
    CHECK(reflect_point({1.1, 0.0}, line_dom, rule, 0.01)[0] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(reflect_point({0.3, 0.0}, line_dom, rule, 0.01)[0] == 0.3);
    CHECK(reflect_point({1.0, 0.0}, line_dom, rule, 0.01)[0] == 1.0);

    const Domain box({Interval{-1.0, 1.0}, Interval{-1.0, 1.0}});
    const Point r = reflect_point({1.2, -1.3}, box, rule, 0.04);
    CHECK(r[0] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(-0.8).epsilon(1e-15));

    CHECK_THROWS_AS(reflect_point({2.0, 0.0}, line_dom, rule, 4.0), InvalidArgument);
    CHECK_THROWS_AS(reflect_point({0.0, 0.0}, line_dom, rule, 0.0), InvalidArgument);
}

TEST_CASE("characteristic feet without drift are the diffusion nodes") {
    const auto g = square(8, 8);
    const auto m = opinion_2d({KernelFamily::zero, 0.0});
    const BackwardSolver solver(m, g);
    const VectorField zero(g);
    const double dt = 0.01;
    const std::size_t idx = 19;
    const Point v = g->point(idx);
    const auto feet = solver.characteristic_points(idx, zero, zero, dt);
    const auto& s = solver.stencil();
    for (std::size_t l = 0; l < feet.size(); ++l) {
        for (int k = 0; k < 2; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            const double sigma = std::sqrt(2.0 * dt * m.diffusions[uk](v));
            CHECK(feet[l][uk] == doctest::Approx(v[uk] + sigma * s.offsets[l][uk]).epsilon(1e-15));
        }
    }
}

TEST_CASE("characteristic feet follow a constant drift") {
    const auto g = line(16);
    const auto m = opinion_1d(0.01, 2, {KernelFamily::zero, 0.0});
    const ScalarField f(g, 0.5);
    VectorField u(g, 0.3);
    const auto feet = characteristic_points(5, f, f, u, u, m, 0.1);
    const double v = g->center(0, 5);
    const double sigma = std::sqrt(2.0 * 0.1 * m.diffusions[0](Point{v, 0.0}));
    const auto s = QuadratureStencil::for_dim(1);
    for (std::size_t l = 0; l < feet.size(); ++l) {
        CHECK(feet[l][0] == doctest::Approx(v + 0.03 + sigma * s.offsets[l][0]).epsilon(1e-14));
    }
}

TEST_CASE("reaction term against a brute-force sum") {
    const auto g = square(8, 8);
    const auto m = opinion_2d({KernelFamily::indicator, 0.6});
    const auto f = random_density(g, 13);
    const auto psi = random_field(g, 14);
    VectorField u(g);
    u[0] = random_field(g, 15);
    u[1] = random_field(g, 16);
    const auto r = reaction_field(f, psi, u, m);
    const auto grad = discrete_gradient(psi);
    const auto q1 = adjoint_nonlocal_direct(f, grad[0], m, 0);
    const auto q2 = adjoint_nonlocal_direct(f, grad[1], m, 1);
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        const Point v = g->point(idx);
        const double expect = q1[idx] + q2[idx] + 0.5 * (std::pow(v[0] - 0.2, 2) + std::pow(v[1] + 0.1, 2)) +
                              0.5 * m.gamma * (u[0][idx] * u[0][idx] + u[1][idx] * u[1][idx]);
        CHECK(r[idx] == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("constant running cost integrates exactly") {
    for (int order : {1, 2}) {
        CAPTURE(order);
        const auto g = square(8, 8);
        auto m = opinion_2d({KernelFamily::indicator, 0.6});
        m.penalties = {PenaltySpec{}, PenaltySpec{}};
        m.gamma = 2.0;
        const TimeGrid t(1.0, 0.05);
        DensityTrajectory f(t, random_density(g, 17));
        ControlTrajectory u(t, VectorField(g, 0.4));
        BackwardOptions opt;
        opt.order = order;
        const auto psi = solve_backward(f, u, m, opt);
        // R = gamma |u|^2 / 2 = 0.32 everywhere.
        for (int n = 0; n <= t.steps(); ++n) {
            for (std::size_t idx = 0; idx < g->size(); ++idx) {
                CHECK(psi[n][idx] == doctest::Approx(0.32 * (1.0 - t.time(n))).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("zero cost gives a zero adjoint") {
    const auto g = line(16);
    auto m = opinion_1d(0.01, 2, {KernelFamily::indicator, 0.3});
    m.penalties = {PenaltySpec{}};
    const TimeGrid t(1.0, 0.1);
    DensityTrajectory f(t, random_density(g, 3));
    ControlTrajectory u(t, VectorField(g));
    const auto psi = solve_backward(f, u, m);
    for (int n = 0; n <= t.steps(); ++n) CHECK(psi[n].max_abs() == 0.0);
}

TEST_CASE("strong drift sends feet out and reflection brings them back") {
    const auto g = line(32);
    const auto m = opinion_1d(0.05, 1, {KernelFamily::one, 0.0});
    const TimeGrid t(0.5, 0.05);
    DensityTrajectory f(t, random_density(g, 4));
    ControlTrajectory u(t, VectorField(g));
    for (int n = 0; n <= t.steps(); ++n) u[n][0] = ScalarField::sample(g, [](const Point& p) { return 3.0 * p[0]; });
    BackwardDiagnostics diag;
    const auto psi = solve_backward(f, u, m, {}, &diag);
    CHECK(diag.reflected_points > 0);
    for (int n = 0; n <= t.steps(); ++n) CHECK(psi[n].all_finite());

    const BackwardSolver solver(m, g);
    const auto drift = total_drift(solver.nonlocal(), f[0], u[0]);
    for (std::size_t idx = 0; idx < g->size(); ++idx) {
        for (const Point& y : solver.characteristic_points(idx, drift, drift, 0.05)) {
            CHECK(g->domain().contains(reflect_point(y, g->domain(), {}, 0.05)));
        }
    }
}
