#pragma once

#include <array>
#include <memory>
#include <vector>

#include "fpoc/fields.hpp"
#include "fpoc/model.hpp"
#include "fpoc/nonlocal.hpp"

namespace fpoc {

/// Two-stage IMEX tableau: implicit a11 = 0, a21 = a22 = 1/2; explicit a~21 = 1; b = b~ = (1/2, 1/2).
struct ButcherIMEX {
    static constexpr int stages = 2;
    static constexpr double a[2][2] = {{0.0, 0.0}, {0.5, 0.5}};
    static constexpr double a_explicit[2][2] = {{0.0, 0.0}, {1.0, 0.0}};
    static constexpr double b[2] = {0.5, 0.5};
    static constexpr double b_explicit[2] = {0.5, 0.5};
};

/// Chang-Cooper blending weight 1/lambda + 1/(1 - e^lambda), in (0, 1).
double delta_coefficient(double lambda);

/// x / (e^x - 1), finite for every finite x.
double bernoulli(double x);

/// Face data per axis, indexed by the lower cell of each face. Faces on the
/// upper boundary are kept with zero transport coefficients.
///
/// The numerical flux is F = A((1 - delta) f_{i+1} + delta f_i) + D (f_{i+1} - f_i) / dv,
/// stored as F = alpha f_{i+1} - beta f_i with alpha = (D/dv) B(-lambda), beta = (D/dv) B(lambda).
struct InterfaceCoeffs {
    int dim = 1;
    std::array<std::vector<double>, 2> advection;
    std::array<std::vector<double>, 2> diffusion;
    std::array<std::vector<double>, 2> lambda;
    std::array<std::vector<double>, 2> delta;
    std::array<std::vector<double>, 2> alpha;
    std::array<std::vector<double>, 2> beta;
};

struct ForwardOptions {
    /// 2: IMEX-RK2; 1: semi-implicit Euler with coefficients frozen at f^n.
    int order = 2;
};

struct ForwardDiagnostics {
    double f_min = 0.0;
    /// max_n |mass(f^n) - 1|
    double e_int = 0.0;
    /// max_n |mass(f^{n+1}) - mass(f^n)|
    double step_mass_change = 0.0;
};

class ForwardSolver {
public:
    ForwardSolver(const ModelSpec& model, GridPtr grid, ForwardOptions options = {});
    ~ForwardSolver();
    ForwardSolver(const ForwardSolver&) = delete;
    ForwardSolver& operator=(const ForwardSolver&) = delete;

    const Grid& grid() const { return *grid_; }
    const NonlocalOperator& nonlocal() const { return nonlocal_; }

    /// Coefficients frozen from the explicit stage field g and control u.
    InterfaceCoeffs interface_coeffs(const ScalarField& g, const VectorField& u) const;

    /// S[f, g]: flux divergence of f with coefficients built from g.
    ScalarField divergence(const ScalarField& f, const InterfaceCoeffs& coeffs) const;

    ScalarField step(const ScalarField& fn, const VectorField& un, const VectorField& unp1, double dt);

    DensityTrajectory solve(const ScalarField& f0, const ControlTrajectory& u, ForwardDiagnostics* diag = nullptr);

private:
    /// Solves (I - c L) x = rhs with L the operator of `coeffs`.
    ScalarField implicit_solve(const InterfaceCoeffs& coeffs, double c, const ScalarField& rhs);

    struct SparseState;

    const ModelSpec* model_;
    GridPtr grid_;
    ForwardOptions options_;
    NonlocalOperator nonlocal_;
    std::array<std::vector<double>, 2> face_diffusion_;
    std::array<std::vector<double>, 2> face_diffusion_slope_;
    std::unique_ptr<SparseState> sparse_;
};

/// Interface fluxes along `axis`, indexed by the lower cell; boundary faces are exactly zero.
std::vector<double> cc_flux(const ScalarField& f, const InterfaceCoeffs& coeffs, int axis);

InterfaceCoeffs interface_coeffs(const ScalarField& g, const VectorField& u, const ModelSpec& model);
ScalarField divergence_rhs(const ScalarField& f, const ScalarField& g, const VectorField& u, const ModelSpec& model);
ScalarField imex_step(const ScalarField& fn, const VectorField& un, const VectorField& unp1, const ModelSpec& model,
                      double dt);
DensityTrajectory solve_forward(const ScalarField& f0, const ControlTrajectory& u, const ModelSpec& model,
                                ForwardOptions options = {}, ForwardDiagnostics* diag = nullptr);

struct StationaryResult {
    ScalarField density;
    int steps = 0;
    double last_increment = 0.0;
};

/// Marches with zero control until max |f^{n+1} - f^n| < tol; throws SolverError after max_steps.
StationaryResult stationary_solve(const ModelSpec& model, GridPtr grid, double dt, double tol = 1e-12,
                                  int max_steps = 1000000, const ScalarField* start = nullptr);

}  // namespace fpoc
