#include "fpoc/interp.hpp"

#include <algorithm>
#include <cmath>

#include "fpoc/error.hpp"

namespace fpoc {

CubicStencil cubic_stencil(const Grid& grid, int axis, double x) {
    const int n = grid.count(axis);
    if (n < 4) throw InvalidArgument("cubic interpolation needs at least 4 cells per axis");
    const double x0 = grid.center(axis, 0);
    const double h = grid.step(axis);
    const int start = std::clamp(static_cast<int>(std::floor((x - x0) / h)) - 1, 0, n - 4);
    const double t = (x - grid.center(axis, start)) / h;
    CubicStencil s;
    s.start = start;
    s.w[0] = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    s.w[1] = t * (t - 2.0) * (t - 3.0) / 2.0;
    s.w[2] = -t * (t - 1.0) * (t - 3.0) / 2.0;
    s.w[3] = t * (t - 1.0) * (t - 2.0) / 6.0;
    return s;
}

InterpWeights::InterpWeights(const Grid& grid, const Point& p) : dim_(grid.dim()) {
    const Domain& dom = grid.domain();
    for (int k = 0; k < dim_; ++k) {
        const double x = p[static_cast<std::size_t>(k)];
        if (!(x >= dom[k].lo && x <= dom[k].hi)) throw InvalidArgument("interpolation point outside the domain");
    }
    s1_ = cubic_stencil(grid, 0, p[0]);
    if (dim_ == 2) s2_ = cubic_stencil(grid, 1, p[1]);
}

double InterpWeights::apply(const ScalarField& field) const {
    if (dim_ == 1) {
        const double* f = field.values().data() + s1_.start;
        return s1_.w[0] * f[0] + s1_.w[1] * f[1] + s1_.w[2] * f[2] + s1_.w[3] * f[3];
    }
    const int n1 = field.grid().count(0);
    double total = 0.0;
    for (int b = 0; b < 4; ++b) {
        const double* f = field.values().data() + static_cast<std::size_t>(s1_.start) +
                          static_cast<std::size_t>(n1) * static_cast<std::size_t>(s2_.start + b);
        const double row = s1_.w[0] * f[0] + s1_.w[1] * f[1] + s1_.w[2] * f[2] + s1_.w[3] * f[3];
        total += s2_.w[b] * row;
    }
    return total;
}

double interp_eval(const ScalarField& field, const Point& p) {
    return InterpWeights(field.grid(), p).apply(field);
}

std::vector<double> interp_eval_many(const ScalarField& field, std::span<const Point> points) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const Point& p : points) out.push_back(interp_eval(field, p));
    return out;
}

}  // namespace fpoc
