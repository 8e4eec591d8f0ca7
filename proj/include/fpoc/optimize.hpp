#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fpoc/backward.hpp"
#include "fpoc/fields.hpp"
#include "fpoc/forward.hpp"
#include "fpoc/mesh.hpp"
#include "fpoc/model.hpp"

namespace fpoc {

enum class GradientForm {
    /// f (gamma u + grad psi), the derivative of the Lagrangian.
    f_weighted,
    /// gamma u + grad psi.
    plain,
};

struct ControlOptions {
    /// Pointwise Euclidean bound on u; infinity means unconstrained.
    double bound = std::numeric_limits<double>::infinity();
    GradientForm gradient_form = GradientForm::plain;
    /// Components that the optimiser may move; the rest stay at zero.
    std::array<bool, 2> active{true, true};
};

struct IterationRecord {
    int iter = 0;
    double cost = 0.0;
    double lambda = 0.0;
    double grad_norm = 0.0;
    double f_min = 0.0;
    double mass_err = 0.0;
    double cpu_seconds = 0.0;
};

enum class StopReason { tol, max_iter, stagnation };

std::string to_string(StopReason reason);

struct OptimizeOptions {
    double tol = 1e-5;
    int max_iter = 500;
    double lambda0 = 0.1;
    double lambda_min = 1e-12;
    double lambda_max = 1e3;
    /// Stop when the best cost has not improved for this many iterations.
    int stagnation_window = 20;
    /// Feed the backward solve with the previous iterate's density, as in the reference loop.
    bool lagged_adjoint = true;
    ControlOptions control;
    ForwardOptions forward;
    BackwardOptions backward;
    /// Threshold on the semi-Lagrangian compatibility ratio above which a warning is recorded.
    double sl_ratio_warning = 0.5;
    std::function<void(const IterationRecord&)> on_iteration;
};

struct OptimizeResult {
    ControlTrajectory control;
    DensityTrajectory density;
    std::vector<double> cost_history;
    std::vector<double> step_sizes;
    std::vector<double> grad_norms;
    std::vector<IterationRecord> log;
    int iterations = 0;
    StopReason stop = StopReason::max_iter;
    double f_min = 0.0;
    double e_int = 0.0;
    double step_mass_change = 0.0;
    /// ||gradient|| / max(1, ||u*||) at the returned control.
    double gradient_ratio = 0.0;
    std::vector<std::string> warnings;

    double final_cost() const { return cost_history.back(); }
};

/// 1/2 int int (sum_k |v_k - target_k|^2 s_k + gamma |u|^2) f, midpoint in space, trapezoid in time.
double cost(const DensityTrajectory& f, const ControlTrajectory& u, const ModelSpec& model);

ControlTrajectory control_gradient(const DensityTrajectory& f, const ScalarTrajectory& psi, const ControlTrajectory& u,
                                   const ModelSpec& model, const ControlOptions& control = {});

/// |<du, dg>| / ||dg||^2 in the space-time product; `fallback` when ||dg||^2 < 1e-30.
double bb_stepsize(const ControlTrajectory& u_prev, const ControlTrajectory& u_prev2, const ControlTrajectory& g,
                   const ControlTrajectory& g_prev, double fallback);

/// Scales u so that its pointwise Euclidean norm never exceeds `bound`.
void clip_control(ControlTrajectory& u, double bound);

/// Zero control on every time level.
ControlTrajectory zero_control(GridPtr grid, const TimeGrid& time);

/// Reduced-gradient loop with Barzilai-Borwein steps.
OptimizeResult optimize(const ModelSpec& model, GridPtr grid, const TimeGrid& time, const OptimizeOptions& options);

/// 2 max_cells |-G + (d_1 D_1, d_2 D_2)|, the drift bound in the positivity step rule.
double positivity_kappa(const NonlocalOperator& op, const ModelSpec& model, const ScalarField& f,
                        const VectorField& u);

}  // namespace fpoc
