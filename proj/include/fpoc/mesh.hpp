#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace fpoc {

/// A point in phase space. One-dimensional problems leave the second slot at 0.
using Point = std::array<double, 2>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

/// Tensor-product box in one or two dimensions.
class Domain {
public:
    Domain() = default;
    explicit Domain(std::vector<Interval> intervals);

    int dim() const { return static_cast<int>(intervals_.size()); }
    const Interval& operator[](int k) const { return intervals_[static_cast<std::size_t>(k)]; }
    const std::vector<Interval>& intervals() const { return intervals_; }

    /// Closed-box membership test.
    bool contains(const Point& p) const;
    double measure() const;

private:
    std::vector<Interval> intervals_;
};

/// Cell-centred uniform grid. Cell (i, j) has flat index i + N_1 j.
///
/// In 1D the second axis is degenerate (one cell, unit step), so loops over
/// (i, j) work unchanged and the cell volume reduces to the first step.
class Grid {
public:
    Grid(Domain domain, std::span<const int> counts);

    int dim() const { return domain_.dim(); }
    const Domain& domain() const { return domain_; }

    int count(int axis) const { return counts_[static_cast<std::size_t>(axis)]; }
    double step(int axis) const { return steps_[static_cast<std::size_t>(axis)]; }
    double min_step() const;
    std::size_t size() const { return static_cast<std::size_t>(counts_[0]) * static_cast<std::size_t>(counts_[1]); }
    double cell_volume() const { return steps_[0] * (dim() == 2 ? steps_[1] : 1.0); }

    double center(int axis, int i) const {
        return centers_[static_cast<std::size_t>(axis)][static_cast<std::size_t>(i)];
    }
    std::span<const double> centers(int axis) const { return centers_[static_cast<std::size_t>(axis)]; }

    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(counts_[0]) * static_cast<std::size_t>(j);
    }
    Point point(int i, int j) const { return {center(0, i), dim() == 2 ? center(1, j) : 0.0}; }
    Point point(std::size_t idx) const {
        const auto n1 = static_cast<std::size_t>(counts_[0]);
        return point(static_cast<int>(idx % n1), static_cast<int>(idx / n1));
    }

    /// Midpoint of the face shared by cell (i, j) and its +1 neighbour along `axis`.
    Point interface_point(int axis, int i, int j) const {
        Point p = point(i, j);
        p[static_cast<std::size_t>(axis)] += 0.5 * step(axis);
        return p;
    }

private:
    Domain domain_;
    std::array<int, 2> counts_{1, 1};
    std::array<double, 2> steps_{1.0, 1.0};
    std::array<std::vector<double>, 2> centers_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Uniform partition of [0, T] with N_T = ceil(T / dt) steps; t^{N_T} may exceed T.
class TimeGrid {
public:
    TimeGrid(double horizon, double dt);

    double horizon() const { return horizon_; }
    double dt() const { return dt_; }
    int steps() const { return steps_; }
    double time(int n) const { return dt_ * n; }

private:
    double horizon_;
    double dt_;
    int steps_;
};

GridPtr build_grid(const Domain& domain, std::span<const int> counts);

/// Counts given as base-2 exponents, N_k = 2^{e_k}.
GridPtr build_grid_exponents(const Domain& domain, std::span<const int> exponents);

/// Positivity-motivated step: safety * dv1 dv2 / (kappa (dv1 + dv2)), or safety * dv / kappa in 1D.
double suggest_dt(const Grid& grid, double kappa, double safety = 1.0);

/// max(D)^{1/3} dt / (T^{2/3} dv^{2/3}); the semi-Lagrangian scheme wants this well below 1.
double sl_compatibility_ratio(double d_max, double dt, double dv_min, double horizon);

}  // namespace fpoc
