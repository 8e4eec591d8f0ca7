#include "fpoc/fields.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>

#include "fpoc/error.hpp"

namespace fpoc {

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b) {
    if (a.size() != b.size() || (a.grid_ptr() != b.grid_ptr() && a.grid().dim() != b.grid().dim())) {
        throw InvalidArgument("fields live on different grids");
    }
}

}  // namespace

ScalarField::ScalarField(GridPtr grid, double fill) : grid_(std::move(grid)) {
    if (!grid_) throw InvalidArgument("field needs a grid");
    values_.assign(grid_->size(), fill);
}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw InvalidArgument("field needs a grid");
    if (values_.size() != grid_->size()) throw InvalidArgument("value count does not match grid size");
}

ScalarField ScalarField::sample(GridPtr grid, const std::function<double(const Point&)>& fn) {
    ScalarField out(grid);
    for (std::size_t idx = 0; idx < out.size(); ++idx) out[idx] = fn(grid->point(idx));
    return out;
}

double ScalarField::min() const {
    return *std::min_element(values_.begin(), values_.end());
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

VectorField::VectorField(GridPtr grid, double fill) {
    for (int k = 0; k < grid->dim(); ++k) components_.emplace_back(grid, fill);
}

VectorField::VectorField(std::vector<ScalarField> components) : components_(std::move(components)) {
    if (components_.empty()) throw InvalidArgument("vector field needs at least one component");
    for (const auto& c : components_) require_same_grid(components_.front(), c);
}

VectorField& VectorField::operator+=(const VectorField& other) {
    for (int k = 0; k < dim(); ++k) (*this)[k] += other[k];
    return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
    for (int k = 0; k < dim(); ++k) (*this)[k] -= other[k];
    return *this;
}

VectorField& VectorField::operator*=(double s) {
    for (auto& c : components_) c *= s;
    return *this;
}

VectorField& VectorField::axpy(double s, const VectorField& other) {
    for (int k = 0; k < dim(); ++k) (*this)[k].axpy(s, other[k]);
    return *this;
}

double VectorField::max_norm() const {
    double m = 0.0;
    const std::size_t n = components_.front().size();
    for (std::size_t idx = 0; idx < n; ++idx) {
        double s = 0.0;
        for (const auto& c : components_) s += c[idx] * c[idx];
        m = std::max(m, std::sqrt(s));
    }
    return m;
}

double integrate(const ScalarField& field) {
    double s = 0.0;
    for (double v : field.values()) s += v;
    return s * field.grid().cell_volume();
}

ErrorMetrics error_metrics(const ScalarField& h, const ScalarField& reference) {
    require_same_grid(h, reference);
    double diff2 = 0.0, ref2 = 0.0, diffinf = 0.0, refinf = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double d = h[i] - reference[i];
        diff2 += d * d;
        ref2 += reference[i] * reference[i];
        diffinf = std::max(diffinf, std::abs(d));
        refinf = std::max(refinf, std::abs(reference[i]));
    }
    if (ref2 == 0.0 || refinf == 0.0) throw InvalidArgument("reference field has zero norm");
    // Quadrature weights cancel in the ratio.
    return {std::sqrt(diff2 / ref2), diffinf / refinf};
}

VectorField discrete_gradient(const ScalarField& field) {
    const Grid& g = field.grid();
    VectorField out(field.grid_ptr());
    for (int axis = 0; axis < g.dim(); ++axis) {
        const int n = g.count(axis);
        if (n < 3) throw InvalidArgument("discrete gradient needs at least 3 cells per axis");
        const double inv2h = 1.0 / (2.0 * g.step(axis));
        ScalarField& d = out[axis];
        const int n1 = g.count(0);
        const int n2 = g.count(1);
        for (int j = 0; j < n2; ++j) {
            for (int i = 0; i < n1; ++i) {
                const int pos = axis == 0 ? i : j;
                auto val = [&](int p) { return axis == 0 ? field.at(p, j) : field.at(i, p); };
                double v;
                if (pos == 0) {
                    v = (-3.0 * val(0) + 4.0 * val(1) - val(2)) * inv2h;
                } else if (pos == n - 1) {
                    v = (3.0 * val(n - 1) - 4.0 * val(n - 2) + val(n - 3)) * inv2h;
                } else {
                    v = (val(pos + 1) - val(pos - 1)) * inv2h;
                }
                d.at(i, j) = v;
            }
        }
    }
    return out;
}

double inner_product_spacetime(const ControlTrajectory& a, const ControlTrajectory& b) {
    if (a.size() != b.size() || a.steps() != b.steps()) throw InvalidArgument("trajectories have different lengths");
    const int nt = a.steps();
    double total = 0.0;
    for (int n = 0; n <= nt; ++n) {
        const VectorField& x = a[n];
        const VectorField& y = b[n];
        if (x.dim() != y.dim() || x[0].size() != y[0].size()) throw InvalidArgument("control shapes differ");
        double s = 0.0;
        for (int k = 0; k < x.dim(); ++k) {
            const auto& xv = x[k].values();
            const auto& yv = y[k].values();
            for (std::size_t i = 0; i < xv.size(); ++i) s += xv[i] * yv[i];
        }
        const double w = (n == 0 || n == nt) ? 0.5 : 1.0;
        total += w * s;
    }
    return total * a[0].grid().cell_volume() * a.time().dt();
}

void write_field_csv(std::ostream& os, const ScalarField& field) {
    const Grid& g = field.grid();
    os << (g.dim() == 1 ? "v,value\n" : "v1,v2,value\n");
    os << std::setprecision(17);
    for (int j = 0; j < g.count(1); ++j) {
        for (int i = 0; i < g.count(0); ++i) {
            const Point p = g.point(i, j);
            if (g.dim() == 1) {
                os << p[0] << ',' << field.at(i, j) << '\n';
            } else {
                os << p[0] << ',' << p[1] << ',' << field.at(i, j) << '\n';
            }
        }
    }
}

void write_field_csv(const std::string& path, const ScalarField& field) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_field_csv(os, field);
}

}  // namespace fpoc
