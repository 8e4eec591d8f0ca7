#include <doctest.h>

#include <cmath>

#include "fpoc/forward.hpp"
#include "support.hpp"

using namespace fpoc;
using namespace fpoc::testing;

namespace {

VectorField sampled_control(GridPtr g, double a, double b) {
    VectorField u(g);
    for (int k = 0; k < g->dim(); ++k) {
        u[k] = ScalarField::sample(g, [&](const Point& p) { return a * p[static_cast<std::size_t>(k)] + b; });
    }
    return u;
}

}  // namespace

TEST_CASE("Chang-Cooper weight") {
    CHECK(delta_coefficient(1.0) == doctest::Approx(0.418023).epsilon(1e-6));
    CHECK(delta_coefficient(0.0) == 0.5);
    CHECK(delta_coefficient(50.0) == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(delta_coefficient(-50.0) == doctest::Approx(1.0 - 1.0 / 50.0).epsilon(1e-12));
    for (double l : {1e-4 * 0.999, -1e-4 * 0.999, 3e-5}) {
        const double direct = 1.0 / l - 1.0 / std::expm1(l);
        CHECK(std::abs(delta_coefficient(l) - direct) < 1e-10);
    }
    for (double l = -200.0; l <= 200.0; l += 0.37) {
        const double d = delta_coefficient(l);
        CHECK(d > 0.0);
        CHECK(d < 1.0);
    }
    CHECK(bernoulli(0.0) == 1.0);
    CHECK(bernoulli(2.0) == doctest::Approx(2.0 / (std::exp(2.0) - 1.0)).epsilon(1e-15));
}

TEST_CASE("flux vanishes on the discrete equilibrium ratio") {
    const auto g = line(24);
    auto m = opinion_1d(0.02, 1, {KernelFamily::zero, 0.0});
    const auto u = sampled_control(g, -0.8, 0.1);
    const auto coeffs = interface_coeffs(ScalarField(g, 0.5), u, m);
    ScalarField f(g);
    f[0] = 1.0;
    for (int i = 0; i + 1 < 24; ++i) f[i + 1] = f[i] * std::exp(-coeffs.lambda[0][static_cast<std::size_t>(i)]);
    const auto flux = cc_flux(f, coeffs, 0);
    for (std::size_t i = 0; i + 1 < 24; ++i) {
        const double scale = coeffs.beta[0][i] * f[i];
        CHECK(std::abs(flux[i]) <= 1e-13 * scale);
    }
    CHECK(flux.back() == 0.0);

    // The same profile is a fixed point of a full step.
    const auto eq = normalize_initial(f);
    const auto next = imex_step(eq, u, u, m, 0.01);
    CHECK(max_abs_diff(next, eq) < 1e-12);
}

TEST_CASE("boundary fluxes are zero and the divergence telescopes") {
    const auto g = square(10, 8);
    const auto m = opinion_2d({KernelFamily::indicator, 0.7});
    const auto f = random_density(g, 4);
    const auto u = sampled_control(g, 0.6, -0.2);
    const auto coeffs = interface_coeffs(f, u, m);
    for (int axis = 0; axis < 2; ++axis) {
        const auto flux = cc_flux(f, coeffs, axis);
        for (int j = 0; j < g->count(1 - axis); ++j) {
            const std::size_t last = axis == 0 ? static_cast<std::size_t>(j * 10 + 9) : static_cast<std::size_t>(7 * 10 + j);
            CHECK(flux[last] == 0.0);
        }
    }
    const auto s = divergence_rhs(random_density(g, 5), f, u, m);
    CHECK(std::abs(integrate(s)) < 1e-13);
}

TEST_CASE("steps conserve mass and positivity") {
    for (int order : {1, 2}) {
        CAPTURE(order);
        const auto g = square(12, 12);
        auto m = opinion_2d({KernelFamily::indicator, 0.5});
        m.horizon = 0.5;
        const TimeGrid t(0.5, 0.02);
        ControlTrajectory u(t, sampled_control(g, -1.5, 0.3));
        for (int n = 0; n <= t.steps(); ++n) u[n] = sampled_control(g, -1.5 + n * 0.05, 0.3);
        ForwardDiagnostics diag;
        const auto f = solve_forward(random_density(g, 8), u, m, ForwardOptions{order}, &diag);
        CHECK(diag.step_mass_change <= 1e-13);
        CHECK(diag.e_int <= 1e-12);
        CHECK(diag.f_min >= 0.0);
        for (int n = 0; n <= t.steps(); ++n) CHECK(f[n].min() >= 0.0);
    }
}

TEST_CASE("solver object and free functions agree") {
    const auto g = line(32);
    const auto m = opinion_1d(0.01, 2, {KernelFamily::indicator, 0.2});
    const TimeGrid t(1.0, 0.05);
    ControlTrajectory u(t, sampled_control(g, 0.4, 0.0));
    const auto f0 = random_density(g, 9);
    ForwardSolver solver(m, g);
    const auto a = solver.solve(f0, u);
    const auto b = solve_forward(f0, u, m);
    CHECK(max_abs_diff(a[t.steps()], b[t.steps()]) < 1e-15);
}

TEST_CASE("stationary march reaches a steady state") {
    const auto g = line(32);
    const auto m = opinion_1d();
    const auto r = stationary_solve(m, g, g->step(0) / 2.0, 1e-12);
    CHECK(r.last_increment < 1e-12);
    CHECK(std::abs(integrate(r.density) - 1.0) < 1e-12);
    const auto again = imex_step(r.density, VectorField(g), VectorField(g), m, g->step(0) / 2.0);
    CHECK(max_abs_diff(again, r.density) < 1e-12);
}
