#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "fpoc/fields.hpp"
#include "fpoc/mesh.hpp"
#include "fpoc/model.hpp"

namespace fpoc::testing {

inline GridPtr line(int n, double lo = -1.0, double hi = 1.0) {
    const int counts[] = {n};
    return build_grid(Domain({Interval{lo, hi}}), counts);
}

inline GridPtr square(int n1, int n2, Interval a = {-1.0, 1.0}, Interval b = {-1.0, 1.0}) {
    const int counts[] = {n1, n2};
    return build_grid(Domain({a, b}), counts);
}

/// P = 1, no local drift, D = scale (1 - v^2)^power, s = 1 with target 0, gamma 1, uniform f0.
inline ModelSpec opinion_1d(double d_scale = 0.01, int power = 2, KernelSpec kernel = {KernelFamily::one, 0.0}) {
    ModelSpec m;
    m.domain = Domain({Interval{-1.0, 1.0}});
    m.horizon = 1.0;
    m.kernels = {kernel};
    m.local_drifts = {LocalDriftSpec{}};
    m.diffusions = {DiffusionSpec{d_scale, {DiffusionFactor{DiffusionFactorKind::one_minus_square, 0, power}}}};
    m.penalties = {PenaltySpec{PenaltyFamily::one}};
    m.targets = {0.0};
    m.gamma = 1.0;
    return m;
}

inline ModelSpec opinion_2d(KernelSpec kernel = {KernelFamily::indicator, 1.0}, double d_scale = 0.01) {
    ModelSpec m;
    m.domain = Domain({Interval{-1.0, 1.0}, Interval{-1.0, 1.0}});
    m.horizon = 1.0;
    m.kernels = {kernel, kernel};
    m.local_drifts = {LocalDriftSpec{}, LocalDriftSpec{}};
    const DiffusionSpec d{d_scale,
                          {DiffusionFactor{DiffusionFactorKind::one_minus_square, 0, 1},
                           DiffusionFactor{DiffusionFactorKind::one_minus_square, 1, 1}}};
    m.diffusions = {d, d};
    m.penalties = {PenaltySpec{PenaltyFamily::one}, PenaltySpec{PenaltyFamily::one}};
    m.targets = {0.2, -0.1};
    m.gamma = 0.5;
    return m;
}

inline ScalarField random_density(GridPtr grid, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    ScalarField f(grid);
    for (auto& x : f.values()) x = u(rng);
    return normalize_initial(f);
}

inline ScalarField random_field(GridPtr grid, unsigned seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    ScalarField f(grid);
    for (auto& x : f.values()) x = u(rng);
    return f;
}

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace fpoc::testing
