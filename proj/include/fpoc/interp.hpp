#pragma once

#include <span>
#include <vector>

#include "fpoc/fields.hpp"

namespace fpoc {

/// Local four-point Lagrange cubic on one axis of a uniform cell-centred grid.
/// The stencil is the four centres around the query, clamped into the index range.
struct CubicStencil {
    int start = 0;
    double w[4] = {0.0, 0.0, 0.0, 0.0};
};

CubicStencil cubic_stencil(const Grid& grid, int axis, double x);

/// Tensor-product cubic interpolant at a point of the closed domain.
double interp_eval(const ScalarField& field, const Point& p);
std::vector<double> interp_eval_many(const ScalarField& field, std::span<const Point> points);

/// Interpolation weights for one query, reusable across fields on the same grid.
class InterpWeights {
public:
    InterpWeights() = default;
    InterpWeights(const Grid& grid, const Point& p);

    double apply(const ScalarField& field) const;

private:
    CubicStencil s1_;
    CubicStencil s2_;
    int dim_ = 1;
};

}  // namespace fpoc
