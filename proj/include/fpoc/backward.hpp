#pragma once

#include <vector>

#include "fpoc/fields.hpp"
#include "fpoc/model.hpp"
#include "fpoc/nonlocal.hpp"

namespace fpoc {

/// Gaussian-moment quadrature for one step of the diffusion:
/// 9 tensor nodes with components in {0, +-sqrt 3} in 2D, 3 nodes in 1D.
struct QuadratureStencil {
    std::vector<Point> offsets;
    std::vector<double> weights;

    static QuadratureStencil for_dim(int dim);
    std::size_t size() const { return weights.size(); }
};

struct ReflectionRule {
    double cbar = 1.0;
};

/// Identity inside the closed box; otherwise each violating component is
/// projected onto its face and pushed inward by cbar sqrt(dt).
Point reflect_point(const Point& y, const Domain& domain, const ReflectionRule& rule, double dt);

struct BackwardOptions {
    /// 2: midpoint characteristics with Crank-Nicolson reaction; 1: Euler characteristics, explicit reaction.
    int order = 2;
    ReflectionRule reflection;
    /// Corrector sweeps for the characteristic feet.
    int char_corrections = 1;
    /// When positive, keep correcting until the largest foot update drops below this value.
    double char_tol = 0.0;
    int char_max_iter = 50;
    double fixed_point_tol = 1e-12;
    int fixed_point_max_iter = 50;
};

struct BackwardDiagnostics {
    int max_fixed_point_iterations = 0;
    long reflected_points = 0;
    /// Largest ratio of successive foot updates seen in the corrector.
    double max_char_contraction = 0.0;
};

class BackwardSolver {
public:
    BackwardSolver(const ModelSpec& model, GridPtr grid, BackwardOptions options = {});

    const QuadratureStencil& stencil() const { return stencil_; }
    const NonlocalOperator& nonlocal() const { return nonlocal_; }

    /// Feet y^l of the discrete characteristics from cell `idx`, before reflection.
    std::vector<Point> characteristic_points(std::size_t idx, const VectorField& g_n, const VectorField& g_np1,
                                             double dt, BackwardDiagnostics* diag = nullptr) const;

    /// Q_1 + ... + Q_d + 1/2 (sum_k |v_k - target_k|^2 s_k + gamma |u|^2).
    ScalarField reaction(const ScalarField& f, const ScalarField& psi, const VectorField& u) const;

    /// One backward step. `r_np1` is R at level n+1; on return `r_n` holds R at level n.
    ScalarField step(const ScalarField& psi_np1, const ScalarField& r_np1, const ScalarField& f_n,
                     const VectorField& u_n, const VectorField& g_n, const VectorField& g_np1, double dt,
                     ScalarField& r_n, BackwardDiagnostics* diag = nullptr) const;

    ScalarTrajectory solve(const DensityTrajectory& f, const ControlTrajectory& u,
                            BackwardDiagnostics* diag = nullptr) const;

private:
    const ModelSpec* model_;
    GridPtr grid_;
    BackwardOptions options_;
    NonlocalOperator nonlocal_;
    QuadratureStencil stencil_;
    ScalarField state_cost_;
    std::vector<std::array<double, 2>> noise_scale_;
};

/// Drift G = P[f] + u at every cell centre, using a prepared operator.
VectorField total_drift(const NonlocalOperator& op, const ScalarField& f, const VectorField& u);

ScalarField reaction_field(const ScalarField& f, const ScalarField& psi, const VectorField& u, const ModelSpec& model);

std::vector<Point> characteristic_points(std::size_t idx, const ScalarField& f_n, const ScalarField& f_np1,
                                         const VectorField& u_n, const VectorField& u_np1, const ModelSpec& model,
                                         double dt, const BackwardOptions& options = {});

ScalarField sl_step(const ScalarField& psi_np1, const ScalarField& f_n, const ScalarField& f_np1,
                    const VectorField& u_n, const VectorField& u_np1, const ModelSpec& model, double dt,
                    const BackwardOptions& options = {});

ScalarTrajectory solve_backward(const DensityTrajectory& f, const ControlTrajectory& u, const ModelSpec& model,
                                 const BackwardOptions& options = {}, BackwardDiagnostics* diag = nullptr);

}  // namespace fpoc
