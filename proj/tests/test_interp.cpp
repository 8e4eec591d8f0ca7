#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fpoc/error.hpp"
#include "fpoc/interp.hpp"
#include "support.hpp"

using namespace fpoc;
using namespace fpoc::testing;

namespace {

double cubic(double x) { return 0.3 - 1.2 * x + 0.7 * x * x + 2.1 * x * x * x; }
double cubic2(double y) { return 1.0 + 0.4 * y - 0.9 * y * y * y; }

std::vector<Point> random_points(const Grid& g, int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) {
        Point p{0.0, 0.0};
        for (int k = 0; k < g.dim(); ++k) {
            std::uniform_real_distribution<double> u(g.domain()[k].lo, g.domain()[k].hi);
            p[static_cast<std::size_t>(k)] = u(rng);
        }
        pts.push_back(p);
    }
    return pts;
}

}  // namespace

TEST_CASE("interpolation is exact at cell centres") {
    const auto g = square(8, 6);
    const auto f = random_field(g, 5);
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        CHECK(interp_eval(f, g->point(idx)) == doctest::Approx(f[idx]).epsilon(1e-14));
    }
}

TEST_CASE("cubics are reproduced up to the boundary") {
    const auto g1 = line(8);
    const auto f1 = ScalarField::sample(g1, [](const Point& p) { return cubic(p[0]); });
    auto pts = random_points(*g1, 200, 1);
    pts.push_back({-1.0, 0.0});
    pts.push_back({1.0, 0.0});
    for (const auto& p : pts) CHECK(std::abs(interp_eval(f1, p) - cubic(p[0])) < 1e-12);

    const auto g2 = square(6, 9, {-1.0, 1.0}, {1.0, 4.0});
    const auto f2 = ScalarField::sample(g2, [](const Point& p) { return cubic(p[0]) * cubic2(p[1]); });
    for (const auto& p : random_points(*g2, 200, 2)) {
        CHECK(std::abs(interp_eval(f2, p) - cubic(p[0]) * cubic2(p[1])) < 1e-11);
    }
}

TEST_CASE("smooth functions converge at fourth order") {
    const auto pts = random_points(*line(4), 400, 9);
    std::vector<double> errors;
    for (int n : {16, 32, 64, 128}) {
        const auto g = line(n);
        const auto f = ScalarField::sample(g, [](const Point& p) { return std::sin(3.0 * p[0]); });
        double e = 0.0;
        for (const auto& p : pts) e = std::max(e, std::abs(interp_eval(f, p) - std::sin(3.0 * p[0])));
        errors.push_back(e);
    }
    for (std::size_t i = 1; i < errors.size(); ++i) CHECK(std::log2(errors[i - 1] / errors[i]) >= 3.7);
}

TEST_CASE("batched and reusable evaluations agree") {
    const auto g = square(10, 10);
    const auto f = random_field(g, 77);
    const auto pts = random_points(*g, 50, 3);
    const auto many = interp_eval_many(f, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(many[i] == interp_eval(f, pts[i]));
        CHECK(InterpWeights(*g, pts[i]).apply(f) == many[i]);
    }
}

TEST_CASE("interpolation rejects points outside the domain") {
    const auto f = random_field(line(8), 1);
    CHECK_THROWS_AS(interp_eval(f, Point{1.0 + 1e-12, 0.0}), InvalidArgument);
    CHECK_THROWS_AS(interp_eval(random_field(line(3), 1), Point{0.0, 0.0}), InvalidArgument);
}
