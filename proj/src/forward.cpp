#include "fpoc/forward.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <string>

#include "fpoc/error.hpp"

namespace fpoc {

double delta_coefficient(double lambda) {
    if (std::abs(lambda) < 1e-4) {
        const double l3 = lambda * lambda * lambda;
        return 0.5 - lambda / 12.0 + l3 / 720.0;
    }
    return 1.0 / lambda - 1.0 / std::expm1(lambda);
}

double bernoulli(double x) {
    if (std::abs(x) < 1e-5) return 1.0 - 0.5 * x + x * x / 12.0;
    return x / std::expm1(x);
}

struct ForwardSolver::SparseState {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    bool analysed = false;
};

ForwardSolver::ForwardSolver(const ModelSpec& model, GridPtr grid, ForwardOptions options)
    : model_(&model), grid_(std::move(grid)), options_(options), nonlocal_(model, grid_),
      sparse_(std::make_unique<SparseState>()) {
    if (options_.order != 1 && options_.order != 2) throw InvalidArgument("forward order must be 1 or 2");
    model.validate(*grid_);
    const Grid& g = *grid_;
    for (int k = 0; k < g.dim(); ++k) {
        const auto uk = static_cast<std::size_t>(k);
        face_diffusion_[uk].assign(g.size(), 0.0);
        face_diffusion_slope_[uk].assign(g.size(), 0.0);
        for (int j = 0; j < g.count(1); ++j) {
            for (int i = 0; i < g.count(0); ++i) {
                const int pos = k == 0 ? i : j;
                if (pos + 1 >= g.count(k)) continue;
                const Point p = g.interface_point(k, i, j);
                face_diffusion_[uk][g.index(i, j)] = model.diffusions[uk](p);
                face_diffusion_slope_[uk][g.index(i, j)] = model.diffusions[uk].derivative(p, k);
            }
        }
    }
}

ForwardSolver::~ForwardSolver() = default;

InterfaceCoeffs ForwardSolver::interface_coeffs(const ScalarField& g, const VectorField& u) const {
    const Grid& grid = *grid_;
    InterfaceCoeffs c;
    c.dim = grid.dim();
    for (int k = 0; k < grid.dim(); ++k) {
        const auto uk = static_cast<std::size_t>(k);
        const double h = grid.step(k);
        const std::vector<double> p = nonlocal_.drift_at_interfaces(g, k);
        const std::size_t n = grid.size();
        c.advection[uk].assign(n, 0.0);
        c.diffusion[uk] = face_diffusion_[uk];
        c.lambda[uk].assign(n, 0.0);
        c.delta[uk].assign(n, 0.5);
        c.alpha[uk].assign(n, 0.0);
        c.beta[uk].assign(n, 0.0);
        const ScalarField& uk_field = u[k];
        for (int j = 0; j < grid.count(1); ++j) {
            for (int i = 0; i < grid.count(0); ++i) {
                const int pos = k == 0 ? i : j;
                if (pos + 1 >= grid.count(k)) continue;
                const std::size_t idx = grid.index(i, j);
                const std::size_t nb = k == 0 ? grid.index(i + 1, j) : grid.index(i, j + 1);
                const double ubar = 0.5 * (uk_field[idx] + uk_field[nb]);
                const double a = -p[idx] - ubar + face_diffusion_slope_[uk][idx];
                const double d = face_diffusion_[uk][idx];
                if (!(d > 0.0)) throw SolverError("zero diffusion at an interior interface");
                const double lam = h * a / d;
                c.advection[uk][idx] = a;
                c.lambda[uk][idx] = lam;
                c.delta[uk][idx] = delta_coefficient(lam);
                c.alpha[uk][idx] = d / h * bernoulli(-lam);
                c.beta[uk][idx] = d / h * bernoulli(lam);
            }
        }
    }
    return c;
}

std::vector<double> cc_flux(const ScalarField& f, const InterfaceCoeffs& coeffs, int axis) {
    const Grid& g = f.grid();
    const auto ua = static_cast<std::size_t>(axis);
    std::vector<double> flux(g.size(), 0.0);
    for (int j = 0; j < g.count(1); ++j) {
        for (int i = 0; i < g.count(0); ++i) {
            const int pos = axis == 0 ? i : j;
            if (pos + 1 >= g.count(axis)) continue;
            const std::size_t idx = g.index(i, j);
            const std::size_t nb = axis == 0 ? g.index(i + 1, j) : g.index(i, j + 1);
            flux[idx] = coeffs.alpha[ua][idx] * f[nb] - coeffs.beta[ua][idx] * f[idx];
        }
    }
    return flux;
}

ScalarField ForwardSolver::divergence(const ScalarField& f, const InterfaceCoeffs& coeffs) const {
    const Grid& g = *grid_;
    ScalarField s(grid_);
    for (int k = 0; k < g.dim(); ++k) {
        const std::vector<double> flux = cc_flux(f, coeffs, k);
        const double inv = 1.0 / g.step(k);
        for (int j = 0; j < g.count(1); ++j) {
            for (int i = 0; i < g.count(0); ++i) {
                const int pos = k == 0 ? i : j;
                const std::size_t idx = g.index(i, j);
                const double right = flux[idx];
                const double left = pos == 0 ? 0.0 : flux[k == 0 ? g.index(i - 1, j) : g.index(i, j - 1)];
                s[idx] += (right - left) * inv;
            }
        }
    }
    return s;
}

ScalarField ForwardSolver::implicit_solve(const InterfaceCoeffs& coeffs, double c, const ScalarField& rhs) {
    const Grid& g = *grid_;
    const std::size_t n = g.size();

    if (g.dim() == 1) {
        const double r = c / g.step(0);
        const auto& al = coeffs.alpha[0];
        const auto& be = coeffs.beta[0];
        std::vector<double> lower(n, 0.0), diag(n, 1.0), upper(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (i + 1 < n) {
                diag[i] += r * be[i];
                upper[i] = -r * al[i];
            }
            if (i > 0) {
                diag[i] += r * al[i - 1];
                lower[i] = -r * be[i - 1];
            }
        }
        // Thomas sweep; the matrix is a column-diagonally-dominant M-matrix.
        std::vector<double> cp(n, 0.0), dp(n, 0.0);
        cp[0] = upper[0] / diag[0];
        dp[0] = rhs[0] / diag[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double m = diag[i] - lower[i] * cp[i - 1];
            cp[i] = upper[i] / m;
            dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / m;
        }
        ScalarField x(grid_);
        x[n - 1] = dp[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
        return x;
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * n);
    for (int j = 0; j < g.count(1); ++j) {
        for (int i = 0; i < g.count(0); ++i) {
            const std::size_t idx = g.index(i, j);
            double diag = 1.0;
            for (int k = 0; k < 2; ++k) {
                const auto uk = static_cast<std::size_t>(k);
                const double r = c / g.step(k);
                const int pos = k == 0 ? i : j;
                if (pos + 1 < g.count(k)) {
                    const std::size_t nb = k == 0 ? g.index(i + 1, j) : g.index(i, j + 1);
                    diag += r * coeffs.beta[uk][idx];
                    trip.emplace_back(static_cast<int>(idx), static_cast<int>(nb), -r * coeffs.alpha[uk][idx]);
                }
                if (pos > 0) {
                    const std::size_t nb = k == 0 ? g.index(i - 1, j) : g.index(i, j - 1);
                    diag += r * coeffs.alpha[uk][nb];
                    trip.emplace_back(static_cast<int>(idx), static_cast<int>(nb), -r * coeffs.beta[uk][nb]);
                }
            }
            trip.emplace_back(static_cast<int>(idx), static_cast<int>(idx), diag);
        }
    }
    Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    if (!sparse_->analysed) {
        sparse_->lu.analyzePattern(m);
        sparse_->analysed = true;
    }
    sparse_->lu.factorize(m);
    if (sparse_->lu.info() != Eigen::Success) throw SolverError("sparse factorisation failed: " + sparse_->lu.lastErrorMessage());
    Eigen::Map<const Eigen::VectorXd> b(rhs.values().data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd sol = sparse_->lu.solve(b);
    if (sparse_->lu.info() != Eigen::Success) throw SolverError("sparse solve failed");
    const double res = (m * sol - b).lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
    if (!(res <= 1e-12 * scale)) throw SolverError("implicit stage residual " + std::to_string(res) + " above tolerance");
    ScalarField x(grid_);
    for (std::size_t q = 0; q < n; ++q) x[q] = sol[static_cast<Eigen::Index>(q)];
    return x;
}

ScalarField ForwardSolver::step(const ScalarField& fn, const VectorField& un, const VectorField& unp1, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    if (options_.order == 1) {
        const InterfaceCoeffs c = interface_coeffs(fn, unp1);
        return implicit_solve(c, dt, fn);
    }
    // Stage 1 is explicit (a11 = 0): F1 = G1 = f^n.
    const InterfaceCoeffs c1 = interface_coeffs(fn, un);
    const ScalarField s1 = divergence(fn, c1);
    ScalarField g2 = fn;
    g2.axpy(dt * ButcherIMEX::a_explicit[1][0], s1);
    const InterfaceCoeffs c2 = interface_coeffs(g2, unp1);
    ScalarField rhs = fn;
    rhs.axpy(dt * ButcherIMEX::a[1][0], s1);
    // The tableau is stiffly accurate (b equals the last row of a), so f^{n+1} = F2.
    return implicit_solve(c2, dt * ButcherIMEX::a[1][1], rhs);
}

DensityTrajectory ForwardSolver::solve(const ScalarField& f0, const ControlTrajectory& u, ForwardDiagnostics* diag) {
    DensityTrajectory traj(u.time(), f0);
    const double dt = u.time().dt();
    double fmin = f0.min();
    double mass_prev = integrate(f0);
    double eint = std::abs(mass_prev - 1.0);
    double step_change = 0.0;
    for (int n = 0; n < u.steps(); ++n) {
        traj[n + 1] = step(traj[n], u[n], u[n + 1], dt);
        const ScalarField& f = traj[n + 1];
        if (!f.all_finite()) throw SolverError("non-finite density at step " + std::to_string(n + 1));
        const double mass = integrate(f);
        fmin = std::min(fmin, f.min());
        eint = std::max(eint, std::abs(mass - 1.0));
        step_change = std::max(step_change, std::abs(mass - mass_prev));
        mass_prev = mass;
    }
    if (diag) *diag = {fmin, eint, step_change};
    return traj;
}

InterfaceCoeffs interface_coeffs(const ScalarField& g, const VectorField& u, const ModelSpec& model) {
    return ForwardSolver(model, g.grid_ptr()).interface_coeffs(g, u);
}

ScalarField divergence_rhs(const ScalarField& f, const ScalarField& g, const VectorField& u, const ModelSpec& model) {
    ForwardSolver solver(model, f.grid_ptr());
    return solver.divergence(f, solver.interface_coeffs(g, u));
}

ScalarField imex_step(const ScalarField& fn, const VectorField& un, const VectorField& unp1, const ModelSpec& model,
                      double dt) {
    return ForwardSolver(model, fn.grid_ptr()).step(fn, un, unp1, dt);
}

DensityTrajectory solve_forward(const ScalarField& f0, const ControlTrajectory& u, const ModelSpec& model,
                                ForwardOptions options, ForwardDiagnostics* diag) {
    return ForwardSolver(model, f0.grid_ptr(), options).solve(f0, u, diag);
}

StationaryResult stationary_solve(const ModelSpec& model, GridPtr grid, double dt, double tol, int max_steps,
                                  const ScalarField* start) {
    ForwardSolver solver(model, grid);
    const VectorField zero(grid);
    StationaryResult res;
    res.density = start ? *start : initial_density(model, grid);
    for (int n = 1; n <= max_steps; ++n) {
        ScalarField next = solver.step(res.density, zero, zero, dt);
        double inc = 0.0;
        for (std::size_t q = 0; q < next.size(); ++q) inc = std::max(inc, std::abs(next[q] - res.density[q]));
        res.density = std::move(next);
        res.steps = n;
        res.last_increment = inc;
        if (!res.density.all_finite()) throw SolverError("non-finite density in stationary march");
        if (inc < tol) return res;
    }
    throw SolverError("stationary state not reached in " + std::to_string(max_steps) + " steps");
}

}  // namespace fpoc
