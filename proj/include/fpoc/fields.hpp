#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fpoc/mesh.hpp"

namespace fpoc {

/// One value per cell centre, laid out as i + N_1 j.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridPtr grid, double fill = 0.0);
    ScalarField(GridPtr grid, std::vector<double> values);

    /// Samples `fn` at every cell centre.
    static ScalarField sample(GridPtr grid, const std::function<double(const Point&)>& fn);

    const GridPtr& grid_ptr() const { return grid_; }
    const Grid& grid() const { return *grid_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t idx) { return values_[idx]; }
    double operator[](std::size_t idx) const { return values_[idx]; }
    double& at(int i, int j) { return values_[grid_->index(i, j)]; }
    double at(int i, int j) const { return values_[grid_->index(i, j)]; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double min() const;
    double max_abs() const;
    bool all_finite() const;

    ScalarField& operator+=(const ScalarField& other);
    ScalarField& operator-=(const ScalarField& other);
    ScalarField& operator*=(double s);
    /// this += s * other
    ScalarField& axpy(double s, const ScalarField& other);

private:
    GridPtr grid_;
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// d components on one grid.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(GridPtr grid, double fill = 0.0);
    explicit VectorField(std::vector<ScalarField> components);

    int dim() const { return static_cast<int>(components_.size()); }
    const GridPtr& grid_ptr() const { return components_.front().grid_ptr(); }
    const Grid& grid() const { return components_.front().grid(); }

    ScalarField& operator[](int k) { return components_[static_cast<std::size_t>(k)]; }
    const ScalarField& operator[](int k) const { return components_[static_cast<std::size_t>(k)]; }

    VectorField& operator+=(const VectorField& other);
    VectorField& operator-=(const VectorField& other);
    VectorField& operator*=(double s);
    VectorField& axpy(double s, const VectorField& other);

    /// max over cells of the Euclidean norm.
    double max_norm() const;

private:
    std::vector<ScalarField> components_;
};

/// Time-indexed sequence of fields over a TimeGrid (N_T + 1 entries).
template <typename Field>
class Trajectory {
public:
    Trajectory(TimeGrid time, Field initial)
        : time_(time), levels_(static_cast<std::size_t>(time.steps()) + 1, std::move(initial)) {}

    const TimeGrid& time() const { return time_; }
    int steps() const { return time_.steps(); }
    std::size_t size() const { return levels_.size(); }

    Field& operator[](int n) { return levels_[static_cast<std::size_t>(n)]; }
    const Field& operator[](int n) const { return levels_[static_cast<std::size_t>(n)]; }

    auto begin() { return levels_.begin(); }
    auto end() { return levels_.end(); }
    auto begin() const { return levels_.begin(); }
    auto end() const { return levels_.end(); }

private:
    TimeGrid time_;
    std::vector<Field> levels_;
};

using DensityTrajectory = Trajectory<ScalarField>;
using ScalarTrajectory = Trajectory<ScalarField>;
using ControlTrajectory = Trajectory<VectorField>;

/// Midpoint-rule mass: sum of values times the cell volume.
double integrate(const ScalarField& field);

struct ErrorMetrics {
    double e2 = 0.0;
    double einf = 0.0;
};

/// Normalised L2 and sup-norm errors of `h` against `reference`.
ErrorMetrics error_metrics(const ScalarField& h, const ScalarField& reference);

/// Second-order gradient: central differences inside, one-sided three-point stencils at the ends.
VectorField discrete_gradient(const ScalarField& field);

/// Space-time L2 product with midpoint weights in space and trapezoidal weights in time.
double inner_product_spacetime(const ControlTrajectory& a, const ControlTrajectory& b);

/// Writes `v,value` (1D) or `v1,v2,value` (2D) with 17 significant digits.
void write_field_csv(std::ostream& os, const ScalarField& field);
void write_field_csv(const std::string& path, const ScalarField& field);

}  // namespace fpoc
