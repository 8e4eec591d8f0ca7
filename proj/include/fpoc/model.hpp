#pragma once

#include <array>
#include <string>
#include <vector>

#include "fpoc/fields.hpp"
#include "fpoc/mesh.hpp"

namespace fpoc {

enum class KernelFamily {
    zero,
    one,
    /// chi(|v - v*| <= radius), Euclidean distance, closed comparison.
    indicator,
    /// chi(|v1 - v1*| <= radius w) w with w = v2* / (v2 + v2*).
    contact_weighted,
};

enum class KernelShape { zero, constant_one, general };

struct KernelSpec {
    KernelFamily family = KernelFamily::zero;
    double radius = 0.0;

    KernelShape shape() const;
    /// Support test of P(v, v*). For every family the support restricted to a
    /// fixed pair of second coordinates is a closed interval in v1* around v1.
    bool inside(const Point& v, const Point& vs, int dim) const;
    /// Kernel value on its support; depends only on the second coordinates.
    double weight(const Point& v, const Point& vs) const;
    double operator()(const Point& v, const Point& vs, int dim) const {
        return inside(v, vs, dim) ? weight(v, vs) : 0.0;
    }
};

enum class LocalDriftFamily {
    zero,
    /// coefficient * log(v_a / reference) * v_a
    log_growth,
};

struct LocalDriftSpec {
    LocalDriftFamily family = LocalDriftFamily::zero;
    double coefficient = 0.0;
    double reference = 1.0;
    int axis = 0;

    double operator()(const Point& v) const;
};

enum class DiffusionFactorKind {
    /// (1 - v_a^2)^power
    one_minus_square,
    /// v_a^power
    monomial,
};

struct DiffusionFactor {
    DiffusionFactorKind kind = DiffusionFactorKind::one_minus_square;
    int axis = 0;
    int power = 1;

    double value(const Point& v) const;
    /// Derivative with respect to v_axis (zero for other axes).
    double derivative(const Point& v, int axis) const;
};

/// D_k(v) = scale * prod(factors).
struct DiffusionSpec {
    double scale = 0.0;
    std::vector<DiffusionFactor> factors;

    double operator()(const Point& v) const;
    double derivative(const Point& v, int axis) const;
};

enum class PenaltyFamily {
    zero,
    one,
    /// 1 / (1 + exp(-slope (v_a - center)))
    logistic,
};

struct PenaltySpec {
    PenaltyFamily family = PenaltyFamily::zero;
    int axis = 0;
    double slope = 0.0;
    double center = 0.0;

    double operator()(const Point& v) const;
};

/// exp(-(z1^2 + cross z1 z2 + z2^2) / (2 (1 - rho^2))) with z_k = (v_k - center_k) / scale_k.
/// One-dimensional problems use only the first coordinate.
struct GaussianTerm {
    std::array<double, 2> center{0.0, 0.0};
    std::array<double, 2> scale{1.0, 1.0};
    double rho = 0.0;
    double cross = 0.0;
    double weight = 1.0;
};

enum class InitialFamily { uniform, gaussian_mix };

struct InitialSpec {
    InitialFamily family = InitialFamily::uniform;
    std::vector<GaussianTerm> terms;

    /// Unnormalised density.
    double operator()(const Point& v, int dim) const;
};

struct ModelSpec {
    Domain domain;
    double horizon = 1.0;
    std::vector<KernelSpec> kernels;
    std::vector<LocalDriftSpec> local_drifts;
    std::vector<DiffusionSpec> diffusions;
    std::vector<PenaltySpec> penalties;
    std::vector<double> targets;
    double gamma = 1.0;
    InitialSpec initial;

    int dim() const { return domain.dim(); }

    /// 1/2 sum_k |v_k - target_k|^2 s_k(v).
    double state_cost(const Point& v) const;

    /// Checks sizes and sign conditions on the grid; throws InvalidArgument.
    void validate(const Grid& grid) const;
};

/// Rescales non-negative samples to unit midpoint mass.
ScalarField normalize_initial(const ScalarField& samples);

/// Samples the model's initial density at cell centres and normalises it.
ScalarField initial_density(const ModelSpec& model, GridPtr grid);

}  // namespace fpoc
