#include "fpoc/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "fpoc/error.hpp"

namespace fpoc {

std::string to_string(StopReason reason) {
    switch (reason) {
    case StopReason::tol:
        return "tol";
    case StopReason::max_iter:
        return "max_iter";
    case StopReason::stagnation:
        return "stagnation";
    }
    return "unknown";
}

double cost(const DensityTrajectory& f, const ControlTrajectory& u, const ModelSpec& model) {
    if (f.steps() != u.steps()) throw InvalidArgument("density and control trajectories differ in length");
    const Grid& g = f[0].grid();
    const int nt = f.steps();
    const int dim = g.dim();
    std::vector<double> state(g.size());
    for (std::size_t idx = 0; idx < g.size(); ++idx) state[idx] = model.state_cost(g.point(idx));
    const double half_gamma = 0.5 * model.gamma;
    double total = 0.0;
    for (int n = 0; n <= nt; ++n) {
        double s = 0.0;
        for (std::size_t idx = 0; idx < g.size(); ++idx) {
            double u2 = 0.0;
            for (int k = 0; k < dim; ++k) u2 += u[n][k][idx] * u[n][k][idx];
            s += (state[idx] + half_gamma * u2) * f[n][idx];
        }
        total += (n == 0 || n == nt ? 0.5 : 1.0) * s;
    }
    return total * g.cell_volume() * f.time().dt();
}

ControlTrajectory control_gradient(const DensityTrajectory& f, const ScalarTrajectory& psi, const ControlTrajectory& u,
                                   const ModelSpec& model, const ControlOptions& control) {
    if (f.steps() != u.steps() || psi.steps() != u.steps()) throw InvalidArgument("trajectory lengths differ");
    ControlTrajectory g(u.time(), VectorField(u[0].grid_ptr()));
    const int dim = model.dim();
    for (int n = 0; n <= u.steps(); ++n) {
        const VectorField grad = discrete_gradient(psi[n]);
        for (int k = 0; k < dim; ++k) {
            if (!control.active[static_cast<std::size_t>(k)]) continue;
            ScalarField& gk = g[n][k];
            for (std::size_t idx = 0; idx < gk.size(); ++idx) {
                const double w = control.gradient_form == GradientForm::f_weighted ? f[n][idx] : 1.0;
                gk[idx] = w * (model.gamma * u[n][k][idx] + grad[k][idx]);
            }
        }
    }
    return g;
}

double bb_stepsize(const ControlTrajectory& u_prev, const ControlTrajectory& u_prev2, const ControlTrajectory& g,
                   const ControlTrajectory& g_prev, double fallback) {
    ControlTrajectory du = u_prev;
    ControlTrajectory dg = g;
    for (int n = 0; n <= du.steps(); ++n) {
        du[n] -= u_prev2[n];
        dg[n] -= g_prev[n];
    }
    const double den = inner_product_spacetime(dg, dg);
    if (den < 1e-30) return fallback;
    return std::abs(inner_product_spacetime(du, dg)) / den;
}

void clip_control(ControlTrajectory& u, double bound) {
    if (!std::isfinite(bound)) return;
    if (!(bound > 0.0)) throw InvalidArgument("control bound must be positive");
    for (auto& level : u) {
        for (std::size_t idx = 0; idx < level[0].size(); ++idx) {
            double s = 0.0;
            for (int k = 0; k < level.dim(); ++k) s += level[k][idx] * level[k][idx];
            const double norm = std::sqrt(s);
            if (norm > bound) {
                const double scale = bound / norm;
                for (int k = 0; k < level.dim(); ++k) level[k][idx] *= scale;
            }
        }
    }
}

ControlTrajectory zero_control(GridPtr grid, const TimeGrid& time) {
    return ControlTrajectory(time, VectorField(std::move(grid)));
}

double positivity_kappa(const NonlocalOperator& op, const ModelSpec& model, const ScalarField& f,
                        const VectorField& u) {
    const Grid& g = f.grid();
    const VectorField drift = total_drift(op, f, u);
    double m = 0.0;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const Point p = g.point(idx);
        double s = 0.0;
        for (int k = 0; k < g.dim(); ++k) {
            const double c = -drift[k][idx] + model.diffusions[static_cast<std::size_t>(k)].derivative(p, k);
            s += c * c;
        }
        m = std::max(m, std::sqrt(s));
    }
    return 2.0 * m;
}

namespace {

double max_diffusion(const ModelSpec& model, const Grid& grid) {
    double d = 0.0;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        for (int k = 0; k < grid.dim(); ++k) d = std::max(d, model.diffusions[static_cast<std::size_t>(k)](grid.point(idx)));
    }
    return d;
}

}  // namespace

OptimizeResult optimize(const ModelSpec& model, GridPtr grid, const TimeGrid& time, const OptimizeOptions& options) {
    using clock = std::chrono::steady_clock;
    if (options.max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
    if (!(options.tol > 0.0)) throw InvalidArgument("tolerance must be positive");

    ForwardSolver forward(model, grid, options.forward);
    BackwardSolver backward(model, grid, options.backward);
    const ScalarField f0 = initial_density(model, grid);
    const double dt = time.dt();

    OptimizeResult res{zero_control(grid, time), DensityTrajectory(time, f0)};

    const double ratio = sl_compatibility_ratio(std::max(max_diffusion(model, *grid), 1e-300), dt,
                                                grid->min_step(), time.horizon());
    if (ratio > options.sl_ratio_warning) {
        std::ostringstream os;
        os << "semi-Lagrangian compatibility ratio " << ratio << " exceeds " << options.sl_ratio_warning;
        res.warnings.push_back(os.str());
    }
    bool dt_warned = false;
    auto check_dt = [&](const DensityTrajectory& f, const ControlTrajectory& u, int iter) {
        if (dt_warned) return;
        for (int n = 0; n <= f.steps(); ++n) {
            const double kappa = positivity_kappa(forward.nonlocal(), model, f[n], u[n]);
            if (kappa > 0.0 && dt > suggest_dt(*grid, kappa)) {
                std::ostringstream os;
                os << "iteration " << iter << ": dt " << dt << " exceeds the positivity step "
                   << suggest_dt(*grid, kappa) << " at level " << n;
                res.warnings.push_back(os.str());
                dt_warned = true;
                return;
            }
        }
    };

    auto absorb = [&](const ForwardDiagnostics& d, bool first) {
        res.f_min = first ? d.f_min : std::min(res.f_min, d.f_min);
        res.e_int = std::max(res.e_int, d.e_int);
        res.step_mass_change = std::max(res.step_mass_change, d.step_mass_change);
    };

    ControlTrajectory u_prev = zero_control(grid, time);
    ControlTrajectory u_prev2 = u_prev;
    ControlTrajectory g_prev = u_prev;
    DensityTrajectory f_prev(time, f0);
    ForwardDiagnostics fd;
    DensityTrajectory f_cur = forward.solve(f0, u_prev, &fd);
    absorb(fd, true);
    check_dt(f_cur, u_prev, 0);

    double j_prev = cost(f_cur, u_prev, model);
    double best = j_prev;
    int since_best = 0;
    res.cost_history.push_back(j_prev);
    double lambda = options.lambda0;
    double gnorm = 0.0;
    ControlTrajectory g_last = u_prev;

    for (int iter = 1; iter <= options.max_iter; ++iter) {
        const auto start = clock::now();
        const ScalarTrajectory psi = backward.solve(options.lagged_adjoint ? f_prev : f_cur, u_prev);
        ControlTrajectory g = control_gradient(f_cur, psi, u_prev, model, options.control);
        if (iter > 1) {
            lambda = bb_stepsize(u_prev, u_prev2, g, g_prev, lambda);
            lambda = std::clamp(lambda, options.lambda_min, options.lambda_max);
        }
        gnorm = std::sqrt(inner_product_spacetime(g, g));

        ControlTrajectory u = u_prev;
        for (int n = 0; n <= u.steps(); ++n) u[n].axpy(-lambda, g[n]);
        clip_control(u, options.control.bound);

        DensityTrajectory f_new = forward.solve(f0, u, &fd);
        absorb(fd, false);
        check_dt(f_new, u, iter);
        const double j = cost(f_new, u, model);
        if (!std::isfinite(j)) throw SolverError("non-finite cost at iteration " + std::to_string(iter));

        const double secs = std::chrono::duration<double>(clock::now() - start).count();
        IterationRecord rec{iter, j, lambda, gnorm, fd.f_min, fd.e_int, secs};
        res.log.push_back(rec);
        res.cost_history.push_back(j);
        res.step_sizes.push_back(lambda);
        res.grad_norms.push_back(gnorm);
        if (options.on_iteration) options.on_iteration(rec);

        u_prev2 = std::move(u_prev);
        u_prev = std::move(u);
        g_prev = std::move(g);
        f_prev = std::move(f_cur);
        f_cur = std::move(f_new);
        res.iterations = iter;

        const double change = std::abs(j - j_prev);
        j_prev = j;
        if (j < best) {
            best = j;
            since_best = 0;
        } else {
            ++since_best;
        }
        if (change < options.tol) {
            res.stop = StopReason::tol;
            break;
        }
        if (since_best >= options.stagnation_window) {
            res.stop = StopReason::stagnation;
            break;
        }
        res.stop = StopReason::max_iter;
    }

    // Gradient at the returned control, for the stationarity report.
    const ScalarTrajectory psi_final = backward.solve(f_cur, u_prev);
    const ControlTrajectory g_final = control_gradient(f_cur, psi_final, u_prev, model, options.control);
    const double unorm = std::sqrt(inner_product_spacetime(u_prev, u_prev));
    res.gradient_ratio = std::sqrt(inner_product_spacetime(g_final, g_final)) / std::max(1.0, unorm);

    res.control = std::move(u_prev);
    res.density = std::move(f_cur);
    return res;
}

}  // namespace fpoc
