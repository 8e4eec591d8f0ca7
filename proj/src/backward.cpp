#include "fpoc/backward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpoc/error.hpp"
#include "fpoc/interp.hpp"

namespace fpoc {

QuadratureStencil QuadratureStencil::for_dim(int dim) {
    const double r3 = std::sqrt(3.0);
    QuadratureStencil s;
    if (dim == 1) {
        s.offsets = {{0.0, 0.0}, {r3, 0.0}, {-r3, 0.0}};
        s.weights = {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0};
        return s;
    }
    if (dim != 2) throw InvalidArgument("stencil dimension must be 1 or 2");
    s.offsets = {{0.0, 0.0}, {r3, 0.0}, {-r3, 0.0}, {0.0, r3}, {0.0, -r3},
                 {r3, r3},   {-r3, r3}, {r3, -r3},  {-r3, -r3}};
    s.weights = {4.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0, 1.0 / 9.0,
                 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0};
    return s;
}

Point reflect_point(const Point& y, const Domain& domain, const ReflectionRule& rule, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    if (!(rule.cbar > 0.0)) throw InvalidArgument("reflection constant must be positive");
    const double shift = rule.cbar * std::sqrt(dt);
    Point out = y;
    for (int k = 0; k < domain.dim(); ++k) {
        const Interval& iv = domain[k];
        if (shift > 0.5 * iv.length()) throw InvalidArgument("reflection shift exceeds the domain half-width");
        double& x = out[static_cast<std::size_t>(k)];
        if (x > iv.hi) x = iv.hi - shift;
        else if (x < iv.lo) x = iv.lo + shift;
    }
    if (!domain.contains(out)) throw SolverError("reflected characteristic left the domain");
    return out;
}

VectorField total_drift(const NonlocalOperator& op, const ScalarField& f, const VectorField& u) {
    VectorField g(f.grid_ptr());
    for (int k = 0; k < f.grid().dim(); ++k) {
        g[k] = op.drift(f, k);
        g[k] += u[k];
    }
    return g;
}

BackwardSolver::BackwardSolver(const ModelSpec& model, GridPtr grid, BackwardOptions options)
    : model_(&model), grid_(std::move(grid)), options_(options), nonlocal_(model, grid_),
      stencil_(QuadratureStencil::for_dim(grid_->dim())) {
    if (options_.order != 1 && options_.order != 2) throw InvalidArgument("backward order must be 1 or 2");
    model.validate(*grid_);
    state_cost_ = ScalarField::sample(grid_, [&](const Point& p) { return model.state_cost(p); });
    noise_scale_.resize(grid_->size());
    for (std::size_t idx = 0; idx < grid_->size(); ++idx) {
        const Point p = grid_->point(idx);
        for (int k = 0; k < grid_->dim(); ++k) {
            noise_scale_[idx][static_cast<std::size_t>(k)] = model.diffusions[static_cast<std::size_t>(k)](p);
        }
    }
}

std::vector<Point> BackwardSolver::characteristic_points(std::size_t idx, const VectorField& g_n,
                                                         const VectorField& g_np1, double dt,
                                                         BackwardDiagnostics* diag) const {
    const Grid& g = *grid_;
    const int dim = g.dim();
    const Point v = g.point(idx);
    std::vector<Point> feet(stencil_.size());
    for (std::size_t l = 0; l < stencil_.size(); ++l) {
        Point noise{0.0, 0.0};
        for (int k = 0; k < dim; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            noise[uk] = std::sqrt(2.0 * dt * noise_scale_[idx][uk]) * stencil_.offsets[l][uk];
        }
        Point y = v;
        for (int k = 0; k < dim; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            y[uk] = v[uk] + dt * g_n[k][idx] + noise[uk];
        }
        if (options_.order == 1) {
            feet[l] = y;
            continue;
        }
        const bool tol_mode = options_.char_tol > 0.0;
        const int sweeps = tol_mode ? options_.char_max_iter : options_.char_corrections;
        double prev_inc = -1.0;
        for (int it = 0; it < sweeps; ++it) {
            const Point yr = reflect_point(y, g.domain(), options_.reflection, dt);
            const InterpWeights w(g, yr);
            Point next = v;
            double inc = 0.0;
            for (int k = 0; k < dim; ++k) {
                const auto uk = static_cast<std::size_t>(k);
                next[uk] = v[uk] + 0.5 * dt * (g_n[k][idx] + w.apply(g_np1[k])) + noise[uk];
                inc = std::max(inc, std::abs(next[uk] - y[uk]));
            }
            y = next;
            if (prev_inc > 1e-13) {
                const double ratio = inc / prev_inc;
                if (diag) diag->max_char_contraction = std::max(diag->max_char_contraction, ratio);
                if (ratio >= 1.0 && inc > 1e-12) {
                    throw SolverError("characteristic fixed point diverges (dt times drift Lipschitz constant too large)");
                }
            }
            prev_inc = inc;
            if (tol_mode && inc < options_.char_tol) break;
        }
        feet[l] = y;
    }
    return feet;
}

ScalarField BackwardSolver::reaction(const ScalarField& f, const ScalarField& psi, const VectorField& u) const {
    ScalarField r = state_cost_;
    const int dim = grid_->dim();
    bool any_nonlocal = false;
    for (int k = 0; k < dim; ++k) any_nonlocal = any_nonlocal || nonlocal_.shape(k) != KernelShape::zero;
    if (any_nonlocal) {
        const VectorField grad = discrete_gradient(psi);
        for (int k = 0; k < dim; ++k) {
            if (nonlocal_.shape(k) != KernelShape::zero) r += nonlocal_.adjoint(f, grad[k], k);
        }
    }
    const double half_gamma = 0.5 * model_->gamma;
    for (std::size_t idx = 0; idx < r.size(); ++idx) {
        double u2 = 0.0;
        for (int k = 0; k < dim; ++k) u2 += u[k][idx] * u[k][idx];
        r[idx] += half_gamma * u2;
    }
    return r;
}

ScalarField BackwardSolver::step(const ScalarField& psi_np1, const ScalarField& r_np1, const ScalarField& f_n,
                                 const VectorField& u_n, const VectorField& g_n, const VectorField& g_np1, double dt,
                                 ScalarField& r_n, BackwardDiagnostics* diag) const {
    const Grid& g = *grid_;
    const double rw = options_.order == 1 ? dt : 0.5 * dt;
    ScalarField base(grid_);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const std::vector<Point> feet = characteristic_points(idx, g_n, g_np1, dt, diag);
        double acc = 0.0;
        for (std::size_t l = 0; l < feet.size(); ++l) {
            const Point yr = reflect_point(feet[l], g.domain(), options_.reflection, dt);
            if (diag && yr != feet[l]) ++diag->reflected_points;
            const InterpWeights w(g, yr);
            acc += stencil_.weights[l] * (w.apply(psi_np1) + rw * w.apply(r_np1));
        }
        base[idx] = acc;
    }

    if (options_.order == 1) {
        r_n = reaction(f_n, base, u_n);
        return base;
    }

    const double half = 0.5 * dt;
    ScalarField psi = psi_np1;
    for (int it = 1; it <= options_.fixed_point_max_iter; ++it) {
        r_n = reaction(f_n, psi, u_n);
        ScalarField next = base;
        next.axpy(half, r_n);
        double inc = 0.0;
        for (std::size_t q = 0; q < next.size(); ++q) inc = std::max(inc, std::abs(next[q] - psi[q]));
        psi = std::move(next);
        if (inc < options_.fixed_point_tol) {
            if (diag) diag->max_fixed_point_iterations = std::max(diag->max_fixed_point_iterations, it);
            r_n = reaction(f_n, psi, u_n);
            return psi;
        }
    }
    throw SolverError("adjoint reaction fixed point did not converge in " +
                      std::to_string(options_.fixed_point_max_iter) + " iterations");
}

ScalarTrajectory BackwardSolver::solve(const DensityTrajectory& f, const ControlTrajectory& u,
                                        BackwardDiagnostics* diag) const {
    if (f.steps() != u.steps()) throw InvalidArgument("density and control trajectories differ in length");
    const int nt = f.steps();
    const double dt = f.time().dt();
    ScalarTrajectory psi(f.time(), ScalarField(grid_));
    ScalarField r_np1 = reaction(f[nt], psi[nt], u[nt]);
    VectorField g_np1 = total_drift(nonlocal_, f[nt], u[nt]);
    for (int n = nt - 1; n >= 0; --n) {
        VectorField g_n = total_drift(nonlocal_, f[n], u[n]);
        ScalarField r_n;
        psi[n] = step(psi[n + 1], r_np1, f[n], u[n], g_n, g_np1, dt, r_n, diag);
        if (!psi[n].all_finite()) throw SolverError("non-finite adjoint at step " + std::to_string(n));
        r_np1 = std::move(r_n);
        g_np1 = std::move(g_n);
    }
    return psi;
}

ScalarField reaction_field(const ScalarField& f, const ScalarField& psi, const VectorField& u, const ModelSpec& model) {
    return BackwardSolver(model, f.grid_ptr()).reaction(f, psi, u);
}

std::vector<Point> characteristic_points(std::size_t idx, const ScalarField& f_n, const ScalarField& f_np1,
                                         const VectorField& u_n, const VectorField& u_np1, const ModelSpec& model,
                                         double dt, const BackwardOptions& options) {
    BackwardSolver solver(model, f_n.grid_ptr(), options);
    const VectorField g_n = total_drift(solver.nonlocal(), f_n, u_n);
    const VectorField g_np1 = total_drift(solver.nonlocal(), f_np1, u_np1);
    return solver.characteristic_points(idx, g_n, g_np1, dt);
}

ScalarField sl_step(const ScalarField& psi_np1, const ScalarField& f_n, const ScalarField& f_np1,
                    const VectorField& u_n, const VectorField& u_np1, const ModelSpec& model, double dt,
                    const BackwardOptions& options) {
    BackwardSolver solver(model, f_n.grid_ptr(), options);
    const VectorField g_n = total_drift(solver.nonlocal(), f_n, u_n);
    const VectorField g_np1 = total_drift(solver.nonlocal(), f_np1, u_np1);
    const ScalarField r_np1 = solver.reaction(f_np1, psi_np1, u_np1);
    ScalarField r_n;
    return solver.step(psi_np1, r_np1, f_n, u_n, g_n, g_np1, dt, r_n);
}

ScalarTrajectory solve_backward(const DensityTrajectory& f, const ControlTrajectory& u, const ModelSpec& model,
                                 const BackwardOptions& options, BackwardDiagnostics* diag) {
    return BackwardSolver(model, f[0].grid_ptr(), options).solve(f, u, diag);
}

}  // namespace fpoc
