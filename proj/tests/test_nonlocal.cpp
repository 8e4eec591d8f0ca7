#include <doctest.h>

#include <cmath>

#include "fpoc/config.hpp"
#include "fpoc/nonlocal.hpp"
#include "support.hpp"

using namespace fpoc;
using namespace fpoc::testing;

namespace {

double mean(const ScalarField& f, int k) {
    double total = 0.0;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        total += f.grid().point(idx)[static_cast<std::size_t>(k)] * f[idx] * f.grid().cell_volume();
    }
    return total;
}

}  // namespace

TEST_CASE("all-to-all interaction pulls towards the mean") {
    const auto g = line(32);
    const auto m = opinion_1d();
    const auto f = random_density(g, 3);
    const double mu = mean(f, 0);
    const auto p = nonlocal_drift(f, m, 0);
    for (int i = 0; i < 32; ++i) CHECK(p[i] == doctest::Approx(mu - g->center(0, i)).epsilon(1e-13));

    NonlocalOperator op(m, g);
    const auto faces = op.drift_at_interfaces(f, 0);
    for (int i = 0; i + 1 < 32; ++i) {
        CHECK(faces[static_cast<std::size_t>(i)] == doctest::Approx(mu - g->interface_point(0, i, 0)[0]).epsilon(1e-13));
    }
    CHECK(faces.back() == 0.0);

    // Q with d psi = 1 is v mass - mean.
    const auto q = op.adjoint(f, ScalarField(g, 1.0), 0);
    for (int i = 0; i < 32; ++i) CHECK(q[i] == doctest::Approx(g->center(0, i) - mu).epsilon(1e-13));
}

TEST_CASE("zero density leaves only the local drift") {
    const Problem p = catalog("opinion-contacts-2d");
    const auto g = square(8, 8, {-1.0, 1.0}, {1.0, 40.0});
    const ScalarField zero(g);
    const auto d1 = nonlocal_drift(zero, p.model, 0);
    const auto d2 = nonlocal_drift(zero, p.model, 1);
    for (std::size_t idx = 0; idx < zero.size(); ++idx) {
        const Point v = g->point(idx);
        CHECK(d1[idx] == 0.0);
        CHECK(d2[idx] == doctest::Approx(-0.05 * std::log(v[1] / 20.0) * v[1]).epsilon(1e-14));
    }
}

TEST_CASE("a single occupied cell") {
    const auto g = line(20);
    const auto m = opinion_1d(0.01, 2, {KernelFamily::indicator, 0.25});
    ScalarField f(g);
    const int j = 7;
    f[j] = 1.0 / g->step(0);
    const auto p = nonlocal_drift(f, m, 0);
    const double vj = g->center(0, j);
    for (int i = 0; i < 20; ++i) {
        const double vi = g->center(0, i);
        const double expect = std::abs(vj - vi) <= 0.25 ? vj - vi : 0.0;
        CHECK(p[i] == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("windowed sums agree with the direct double loop") {
    SUBCASE("1d indicator") {
        const auto g = line(64);
        const auto m = opinion_1d(0.01, 2, {KernelFamily::indicator, 0.1});
        const auto f = random_density(g, 11);
        const auto dpsi = random_field(g, 12);
        CHECK(max_abs_diff(nonlocal_drift(f, m, 0), nonlocal_drift_direct(f, m, 0)) < 1e-13);
        NonlocalOperator op(m, g);
        CHECK(max_abs_diff(op.adjoint(f, dpsi, 0), adjoint_nonlocal_direct(f, dpsi, m, 0)) < 1e-13);
    }
    SUBCASE("2d indicator disk") {
        const auto g = square(16, 12);
        const auto m = opinion_2d({KernelFamily::indicator, 0.6});
        const auto f = random_density(g, 21);
        const auto dpsi = random_field(g, 22);
        NonlocalOperator op(m, g);
        for (int k = 0; k < 2; ++k) {
            CHECK(max_abs_diff(op.drift(f, k), nonlocal_drift_direct(f, m, k)) < 1e-13);
            CHECK(max_abs_diff(op.adjoint(f, dpsi, k), adjoint_nonlocal_direct(f, dpsi, m, k)) < 1e-13);
        }
    }
    SUBCASE("contact weighted kernel") {
        const Problem p = catalog("opinion-contacts-2d");
        const auto g = square(16, 16, {-1.0, 1.0}, {1.0, 40.0});
        const auto f = random_density(g, 31);
        const auto dpsi = random_field(g, 32);
        NonlocalOperator op(p.model, g);
        CHECK(max_abs_diff(op.drift(f, 0), nonlocal_drift_direct(f, p.model, 0)) < 1e-13);
        CHECK(max_abs_diff(op.adjoint(f, dpsi, 0), adjoint_nonlocal_direct(f, dpsi, p.model, 0)) < 1e-13);
    }
}

TEST_CASE("interaction drift is linear in the density") {
    const auto g = square(12, 12);
    const auto m = opinion_2d({KernelFamily::indicator, 0.5});
    const auto a = random_density(g, 41);
    const auto b = random_density(g, 42);
    NonlocalOperator op(m, g);
    for (int k = 0; k < 2; ++k) {
        const auto lhs = op.drift(2.0 * a + -0.5 * b, k);
        const auto rhs = 2.0 * op.drift(a, k) + -0.5 * op.drift(b, k);
        CHECK(max_abs_diff(lhs, rhs) < 1e-13);
    }
}

TEST_CASE("total drift adds the control") {
    const auto g = square(8, 8);
    const auto m = opinion_2d();
    const auto f = random_density(g, 51);
    VectorField u(g);
    u[0] = random_field(g, 52);
    u[1] = random_field(g, 53);
    const auto total = drift_total(f, u, m);
    for (int k = 0; k < 2; ++k) CHECK(max_abs_diff(total[k], nonlocal_drift(f, m, k) + u[k]) < 1e-15);
}
