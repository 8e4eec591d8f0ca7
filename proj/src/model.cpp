#include "fpoc/model.hpp"

#include <cmath>
#include <string>

#include "fpoc/error.hpp"

namespace fpoc {

KernelShape KernelSpec::shape() const {
    switch (family) {
    case KernelFamily::zero:
        return KernelShape::zero;
    case KernelFamily::one:
        return KernelShape::constant_one;
    default:
        return KernelShape::general;
    }
}

bool KernelSpec::inside(const Point& v, const Point& vs, int dim) const {
    switch (family) {
    case KernelFamily::zero:
        return false;
    case KernelFamily::one:
        return true;
    case KernelFamily::indicator: {
        const double d0 = v[0] - vs[0];
        if (dim == 1) return std::abs(d0) <= radius;
        const double d1 = v[1] - vs[1];
        return d0 * d0 + d1 * d1 <= radius * radius;
    }
    case KernelFamily::contact_weighted: {
        const double w = vs[1] / (v[1] + vs[1]);
        return std::abs(v[0] - vs[0]) <= radius * w;
    }
    }
    return false;
}

double KernelSpec::weight(const Point& v, const Point& vs) const {
    switch (family) {
    case KernelFamily::zero:
        return 0.0;
    case KernelFamily::contact_weighted:
        return vs[1] / (v[1] + vs[1]);
    default:
        return 1.0;
    }
}

double LocalDriftSpec::operator()(const Point& v) const {
    if (family == LocalDriftFamily::zero) return 0.0;
    const double x = v[static_cast<std::size_t>(axis)];
    return coefficient * std::log(x / reference) * x;
}

double DiffusionFactor::value(const Point& v) const {
    const double x = v[static_cast<std::size_t>(axis)];
    switch (kind) {
    case DiffusionFactorKind::one_minus_square:
        return std::pow(1.0 - x * x, power);
    case DiffusionFactorKind::monomial:
        return std::pow(x, power);
    }
    return 0.0;
}

double DiffusionFactor::derivative(const Point& v, int wrt) const {
    if (wrt != axis || power == 0) return 0.0;
    const double x = v[static_cast<std::size_t>(axis)];
    switch (kind) {
    case DiffusionFactorKind::one_minus_square:
        return -2.0 * power * x * std::pow(1.0 - x * x, power - 1);
    case DiffusionFactorKind::monomial:
        return power * std::pow(x, power - 1);
    }
    return 0.0;
}

double DiffusionSpec::operator()(const Point& v) const {
    double d = scale;
    for (const auto& f : factors) d *= f.value(v);
    return d;
}

double DiffusionSpec::derivative(const Point& v, int axis) const {
    double total = 0.0;
    for (std::size_t m = 0; m < factors.size(); ++m) {
        double term = scale * factors[m].derivative(v, axis);
        if (term == 0.0) continue;
        for (std::size_t q = 0; q < factors.size(); ++q) {
            if (q != m) term *= factors[q].value(v);
        }
        total += term;
    }
    return total;
}

double PenaltySpec::operator()(const Point& v) const {
    switch (family) {
    case PenaltyFamily::zero:
        return 0.0;
    case PenaltyFamily::one:
        return 1.0;
    case PenaltyFamily::logistic:
        return 1.0 / (1.0 + std::exp(-slope * (v[static_cast<std::size_t>(axis)] - center)));
    }
    return 0.0;
}

double InitialSpec::operator()(const Point& v, int dim) const {
    if (family == InitialFamily::uniform) return 1.0;
    double total = 0.0;
    for (const auto& t : terms) {
        const double z1 = (v[0] - t.center[0]) / t.scale[0];
        double q = z1 * z1;
        if (dim == 2) {
            const double z2 = (v[1] - t.center[1]) / t.scale[1];
            q += t.cross * z1 * z2 + z2 * z2;
        }
        total += t.weight * std::exp(-q / (2.0 * (1.0 - t.rho * t.rho)));
    }
    return total;
}

double ModelSpec::state_cost(const Point& v) const {
    double s = 0.0;
    for (int k = 0; k < dim(); ++k) {
        const auto uk = static_cast<std::size_t>(k);
        const double d = v[uk] - targets[uk];
        s += d * d * penalties[uk](v);
    }
    return 0.5 * s;
}

void ModelSpec::validate(const Grid& grid) const {
    const auto d = static_cast<std::size_t>(dim());
    if (kernels.size() != d || local_drifts.size() != d || diffusions.size() != d || penalties.size() != d ||
        targets.size() != d) {
        throw InvalidArgument("model component lists must have one entry per dimension");
    }
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
    if (grid.dim() != dim()) throw InvalidArgument("grid and model dimensions differ");
    for (int k = 0; k < dim(); ++k) {
        const auto& diff = diffusions[static_cast<std::size_t>(k)];
        const auto& pen = penalties[static_cast<std::size_t>(k)];
        for (int j = 0; j < grid.count(1); ++j) {
            for (int i = 0; i < grid.count(0); ++i) {
                const Point p = grid.point(i, j);
                if (!(diff(p) >= 0.0)) throw InvalidArgument("negative diffusion at a cell centre");
                if (!(pen(p) >= 0.0)) throw InvalidArgument("negative penalty at a cell centre");
                const int pos = k == 0 ? i : j;
                if (pos + 1 < grid.count(k) && !(diff(grid.interface_point(k, i, j)) > 0.0)) {
                    throw InvalidArgument("diffusion D_" + std::to_string(k + 1) +
                                          " vanishes at an interior interface");
                }
            }
        }
    }
}

ScalarField normalize_initial(const ScalarField& samples) {
    for (double v : samples.values()) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("initial density must be finite and non-negative");
    }
    const double mass = integrate(samples);
    if (!(mass > 0.0)) throw InvalidArgument("initial density is identically zero");
    ScalarField out = samples;
    out *= 1.0 / mass;
    return out;
}

ScalarField initial_density(const ModelSpec& model, GridPtr grid) {
    const int dim = grid->dim();
    return normalize_initial(ScalarField::sample(grid, [&](const Point& p) { return model.initial(p, dim); }));
}

}  // namespace fpoc
