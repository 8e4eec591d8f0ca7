#include "fpoc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "fpoc/backward.hpp"
#include "fpoc/error.hpp"
#include "fpoc/forward.hpp"
#include "fpoc/interp.hpp"

namespace fpoc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::optional<double> order(double coarse, double fine) {
    if (!(coarse > 0.0) || !(fine > 0.0)) return std::nullopt;
    return std::log2(coarse / fine);
}

void fill_orders(std::vector<ConvergenceRow>& rows) {
    for (std::size_t r = 1; r < rows.size(); ++r) {
        rows[r].p2 = order(rows[r - 1].e2, rows[r].e2);
        rows[r].pinf = order(rows[r - 1].einf, rows[r].einf);
    }
}

/// sigma^2 of the stationary family P = 1, D = (sigma^2/2)(1 - v^2)^2 on [-1, 1].
double stationary_sigma2(const ModelSpec& m) {
    const bool ok = m.dim() == 1 && m.kernels[0].family == KernelFamily::one &&
                    m.local_drifts[0].family == LocalDriftFamily::zero && m.diffusions[0].factors.size() == 1 &&
                    m.diffusions[0].factors[0].kind == DiffusionFactorKind::one_minus_square &&
                    m.diffusions[0].factors[0].power == 2 && m.domain[0].lo == -1.0 && m.domain[0].hi == 1.0;
    if (!ok) throw InvalidArgument("analytic stationary reference needs the P = 1, (1 - v^2)^2 family on [-1, 1]");
    return 2.0 * m.diffusions[0].scale;
}

double first_moment(const ScalarField& f) {
    double s = 0.0;
    for (std::size_t idx = 0; idx < f.size(); ++idx) s += f.grid().point(idx)[0] * f[idx];
    return s * f.grid().cell_volume();
}

std::string fmt_time(double t) {
    std::ostringstream os;
    os << std::setprecision(6) << t;
    return os.str();
}

int snapshot_level(const TimeGrid& time, double fraction) {
    const int n = static_cast<int>(std::lround(fraction * time.horizon() / time.dt()));
    return std::clamp(n, 0, time.steps());
}

void write_snapshots(const std::string& dir, const std::string& stem, const Trajectory<ScalarField>& traj,
                     const std::vector<double>& fractions) {
    for (double fr : fractions) {
        const int n = snapshot_level(traj.time(), fr);
        write_field_csv((fs::path(dir) / (stem + "_t" + fmt_time(traj.time().time(n)) + ".csv")).string(), traj[n]);
    }
}

void write_control_snapshots(const std::string& dir, const ControlTrajectory& u, const std::vector<double>& fractions) {
    for (double fr : fractions) {
        const int n = snapshot_level(u.time(), fr);
        for (int k = 0; k < u[n].dim(); ++k) {
            write_field_csv((fs::path(dir) / ("control_u" + std::to_string(k + 1) + "_t" +
                                              fmt_time(u.time().time(n)) + ".csv"))
                                .string(),
                            u[n][k]);
        }
    }
}

std::array<double, 3> legendre3(double x) {
    return {1.0, x, 0.5 * (3.0 * x * x - 1.0)};
}

double unit_coordinate(const Interval& iv, double x) {
    return 2.0 * (x - iv.lo) / iv.length() - 1.0;
}

}  // namespace

ScalarField stationary_oracle(double sigma2, double mean, GridPtr grid) {
    if (!(sigma2 > 0.0)) throw InvalidArgument("sigma^2 must be positive");
    if (grid->dim() != 1 || grid->domain()[0].lo != -1.0 || grid->domain()[0].hi != 1.0) {
        throw InvalidArgument("stationary oracle lives on a 1D grid over [-1, 1]");
    }
    const double a = mean / (2.0 * sigma2);
    std::vector<double> logs(grid->size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logs.size(); ++i) {
        const double v = grid->center(0, static_cast<int>(i));
        logs[i] = (-2.0 + a) * std::log1p(v) + (-2.0 - a) * std::log1p(-v) -
                  (1.0 - mean * v) / (sigma2 * (1.0 - v * v));
        top = std::max(top, logs[i]);
    }
    ScalarField f(grid);
    for (std::size_t i = 0; i < logs.size(); ++i) f[i] = std::exp(logs[i] - top);
    return normalize_initial(f);
}

double fd_gradient_oracle(const ModelSpec& model, const ScalarField& f0, const ControlTrajectory& u,
                          const ControlTrajectory& du, double eps, const ForwardOptions& options) {
    if (!(eps > 0.0)) throw InvalidArgument("finite-difference step must be positive");
    ForwardSolver solver(model, f0.grid_ptr(), options);
    ControlTrajectory plus = u;
    ControlTrajectory minus = u;
    for (int n = 0; n <= u.steps(); ++n) {
        plus[n].axpy(eps, du[n]);
        minus[n].axpy(-eps, du[n]);
    }
    const double jp = cost(solver.solve(f0, plus), plus, model);
    const double jm = cost(solver.solve(f0, minus), minus, model);
    return (jp - jm) / (2.0 * eps);
}

std::vector<GradientCheckRow> gradient_check(const Problem& problem, double eps, int directions, std::uint64_t seed,
                                             DirectionKind kind) {
    if (directions < 1) throw InvalidArgument("need at least one direction");
    const GridPtr grid = problem.grid();
    const TimeGrid time = problem.time(*grid);
    const ModelSpec& model = problem.model;
    const ScalarField f0 = initial_density(model, grid);
    const ControlTrajectory u = problem.sampled_control(grid, time);
    const DensityTrajectory f = solve_forward(f0, u, model, problem.forward_options());
    const ScalarTrajectory psi = solve_backward(f, u, model, problem.backward_options());
    ControlOptions copts = problem.control;
    copts.bound = std::numeric_limits<double>::infinity();
    // The Frechet derivative of J carries the density weight whatever form the optimiser descends along.
    copts.gradient_form = GradientForm::f_weighted;
    const ControlTrajectory g = control_gradient(f, psi, u, model, copts);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<GradientCheckRow> rows;
    for (int d = 0; d < directions; ++d) {
        ControlTrajectory du(time, VectorField(grid));
        for (int k = 0; k < grid->dim(); ++k) {
            if (!copts.active[static_cast<std::size_t>(k)]) continue;
            if (kind == DirectionKind::cellwise) {
                for (auto& level : du) {
                    for (auto& x : level[k].values()) x = normal(rng);
                }
                continue;
            }
            // c[a][b][c]: degree a in v_1, b in v_2 (2D only), c in t.
            const int deg2 = grid->dim() == 2 ? 2 : 0;
            double c[3][3][3] = {};
            for (int a = 0; a <= 2; ++a)
                for (int b = 0; b <= deg2; ++b)
                    for (int e = 0; e <= 2; ++e) c[a][b][e] = normal(rng);
            for (int n = 0; n <= time.steps(); ++n) {
                const auto pt = legendre3(2.0 * n / time.steps() - 1.0);
                for (std::size_t idx = 0; idx < grid->size(); ++idx) {
                    const Point v = grid->point(idx);
                    const auto p1 = legendre3(unit_coordinate(grid->domain()[0], v[0]));
                    const auto p2 = legendre3(grid->dim() == 2 ? unit_coordinate(grid->domain()[1], v[1]) : 0.0);
                    double s = 0.0;
                    for (int a = 0; a <= 2; ++a)
                        for (int b = 0; b <= deg2; ++b)
                            for (int e = 0; e <= 2; ++e) s += c[a][b][e] * p1[a] * p2[b] * pt[e];
                    du[n][k][idx] = s;
                }
            }
        }
        GradientCheckRow row;
        row.adjoint = inner_product_spacetime(g, du);
        row.finite_difference = fd_gradient_oracle(model, f0, u, du, eps, problem.forward_options());
        row.relative_error = std::abs(row.adjoint - row.finite_difference) /
                             std::max(std::abs(row.finite_difference), std::numeric_limits<double>::min());
        rows.push_back(row);
    }
    return rows;
}

Reference Reference::parse(const std::string& text) {
    if (text == "analytic") return {Kind::analytic, 0};
    if (text.rfind("fine:", 0) == 0) {
        try {
            return {Kind::fine, std::stoi(text.substr(5))};
        } catch (const std::exception&) {
        }
    }
    throw InvalidArgument("reference must be 'analytic' or 'fine:<nv>'");
}

ScalarField restrict_field(const ScalarField& fine, GridPtr coarse) {
    ScalarField out(coarse);
    for (std::size_t idx = 0; idx < out.size(); ++idx) out[idx] = interp_eval(fine, coarse->point(idx));
    return out;
}

std::vector<ConvergenceRow> convergence_study(const Problem& problem, const std::vector<int>& nvs,
                                              const Reference& reference) {
    if (nvs.empty()) throw InvalidArgument("convergence study needs at least one resolution");
    for (std::size_t r = 1; r < nvs.size(); ++r) {
        if (nvs[r] <= nvs[r - 1]) throw InvalidArgument("resolutions must be strictly increasing");
    }
    const int dim = problem.model.dim();
    auto at_level = [&](int nv) {
        Problem p = problem;
        p.counts.assign(static_cast<std::size_t>(dim), nv);
        return p;
    };

    std::vector<ConvergenceRow> rows;
    if (problem.mode == RunMode::stationary) {
        if (reference.kind != Reference::Kind::analytic) throw InvalidArgument("stationary studies use the analytic reference");
        const double sigma2 = stationary_sigma2(problem.model);
        for (int nv : nvs) {
            const Problem p = at_level(nv);
            const GridPtr grid = p.grid();
            const auto start = std::chrono::steady_clock::now();
            const ScalarField f0 = initial_density(p.model, grid);
            const StationaryResult st = stationary_solve(p.model, grid, p.dt_rule.resolve(*grid), p.stationary.tol,
                                                         p.stationary.max_steps, &f0);
            const double secs = seconds_since(start);
            const ErrorMetrics e = error_metrics(st.density, stationary_oracle(sigma2, first_moment(f0), grid));
            rows.push_back({nv, e.e2, std::nullopt, e.einf, std::nullopt, secs});
        }
        fill_orders(rows);
        return rows;
    }

    if (problem.mode != RunMode::adjoint) throw InvalidArgument("convergence studies support stationary and adjoint modes");
    if (reference.kind != Reference::Kind::fine) throw InvalidArgument("adjoint studies need a fine-grid reference");
    if (reference.nv < nvs.back()) throw InvalidArgument("reference resolution must not be below the finest test grid");

    const Problem ref = at_level(reference.nv);
    const GridPtr fine_grid = ref.grid();
    const TimeGrid fine_time = ref.time(*fine_grid);
    const ControlTrajectory fine_u = ref.sampled_control(fine_grid, fine_time);
    const DensityTrajectory fine_f =
        solve_forward(initial_density(ref.model, fine_grid), fine_u, ref.model, ref.forward_options());
    const ScalarTrajectory fine_psi = solve_backward(fine_f, fine_u, ref.model, ref.backward_options());

    for (int nv : nvs) {
        const Problem p = at_level(nv);
        const GridPtr grid = p.grid();
        const TimeGrid time = p.time(*grid);
        const double ratio = time.dt() / fine_time.dt();
        const int stride = static_cast<int>(std::lround(ratio));
        if (std::abs(ratio - stride) > 1e-9 || stride * time.steps() != fine_time.steps()) {
            throw InvalidArgument("coarse time levels must coincide with reference time levels");
        }
        DensityTrajectory f(time, ScalarField(grid));
        for (int n = 0; n <= time.steps(); ++n) f[n] = restrict_field(fine_f[n * stride], grid);
        const ControlTrajectory u = p.sampled_control(grid, time);
        const auto start = std::chrono::steady_clock::now();
        const ScalarTrajectory psi = solve_backward(f, u, p.model, p.backward_options());
        const double secs = seconds_since(start);
        const ErrorMetrics e = error_metrics(psi[0], restrict_field(fine_psi[0], grid));
        rows.push_back({nv, e.e2, std::nullopt, e.einf, std::nullopt, secs});
    }
    fill_orders(rows);
    return rows;
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "nv,E2,p2,Einf,pinf,cpu_seconds\n" << std::setprecision(17);
    for (const auto& r : rows) {
        os << r.nv << ',' << r.e2 << ',';
        if (r.p2) os << *r.p2;
        os << ',' << r.einf << ',';
        if (r.pinf) os << *r.pinf;
        os << ',' << r.cpu_seconds << '\n';
    }
}

bool RunSummary::invariants_ok() const {
    return f_min >= -1e-14 && e_int <= 1e-12;
}

json RunSummary::to_json() const {
    json j{{"J*", cost},
           {"iterations", iterations},
           {"f_min", f_min},
           {"E_int", e_int},
           {"step_mass_change", step_mass_change},
           {"wall_seconds", wall_seconds},
           {"stop_reason", stop_reason},
           {"warnings", warnings},
           {"invariants_ok", invariants_ok()}};
    if (stationary_steps) j["stationary_steps"] = *stationary_steps;
    if (e2) j["E2"] = *e2;
    if (einf) j["Einf"] = *einf;
    return j;
}

RunSummary run_benchmark(const Problem& problem, const std::string& out_dir) {
    const bool write = !out_dir.empty();
    if (write) fs::create_directories(out_dir);
    const GridPtr grid = problem.grid();
    const TimeGrid time = problem.time(*grid);
    RunSummary s;

    switch (problem.mode) {
    case RunMode::optimize: {
        std::ofstream log;
        if (write) {
            log.open(fs::path(out_dir) / "iterations.csv");
            log << "iter,J,lambda,grad_norm,f_min,mass_err,cpu_seconds\n" << std::setprecision(17);
        }
        OptimizeOptions opts = problem.optimize_options();
        if (write) {
            opts.on_iteration = [&log](const IterationRecord& r) {
                log << r.iter << ',' << r.cost << ',' << r.lambda << ',' << r.grad_norm << ',' << r.f_min << ','
                    << r.mass_err << ',' << r.cpu_seconds << '\n';
            };
        }
        const auto start = std::chrono::steady_clock::now();
        const OptimizeResult res = optimize(problem.model, grid, time, opts);
        s.wall_seconds = seconds_since(start);
        s.cost = res.final_cost();
        s.iterations = res.iterations;
        s.f_min = res.f_min;
        s.e_int = res.e_int;
        s.step_mass_change = res.step_mass_change;
        s.stop_reason = to_string(res.stop);
        s.warnings = res.warnings;
        if (write) {
            write_snapshots(out_dir, "density", res.density, problem.snapshots);
            write_control_snapshots(out_dir, res.control, problem.snapshots);
        }
        break;
    }
    case RunMode::forward:
    case RunMode::adjoint: {
        const ControlTrajectory u = problem.sampled_control(grid, time);
        const auto start = std::chrono::steady_clock::now();
        ForwardDiagnostics fd;
        const DensityTrajectory f =
            solve_forward(initial_density(problem.model, grid), u, problem.model, problem.forward_options(), &fd);
        std::optional<ScalarTrajectory> psi;
        if (problem.mode == RunMode::adjoint) psi = solve_backward(f, u, problem.model, problem.backward_options());
        s.wall_seconds = seconds_since(start);
        s.cost = cost(f, u, problem.model);
        s.f_min = fd.f_min;
        s.e_int = fd.e_int;
        s.step_mass_change = fd.step_mass_change;
        s.stop_reason = "completed";
        const NonlocalOperator op(problem.model, grid);
        for (int n = 0; n <= f.steps(); ++n) {
            const double kappa = positivity_kappa(op, problem.model, f[n], u[n]);
            if (kappa > 0.0 && time.dt() > suggest_dt(*grid, kappa)) {
                std::ostringstream os;
                os << "dt " << time.dt() << " exceeds the positivity step " << suggest_dt(*grid, kappa)
                   << " at level " << n;
                s.warnings.push_back(os.str());
                break;
            }
        }
        if (write) {
            write_snapshots(out_dir, "density", f, problem.snapshots);
            if (psi) write_snapshots(out_dir, "adjoint", *psi, problem.snapshots);
        }
        break;
    }
    case RunMode::stationary: {
        const ScalarField f0 = initial_density(problem.model, grid);
        const auto start = std::chrono::steady_clock::now();
        const StationaryResult st = stationary_solve(problem.model, grid, time.dt(), problem.stationary.tol,
                                                     problem.stationary.max_steps, &f0);
        s.wall_seconds = seconds_since(start);
        s.stationary_steps = st.steps;
        s.f_min = std::min(f0.min(), st.density.min());
        s.e_int = std::abs(integrate(st.density) - 1.0);
        s.stop_reason = "stationary";
        try {
            const ErrorMetrics e =
                error_metrics(st.density, stationary_oracle(stationary_sigma2(problem.model), first_moment(f0), grid));
            s.e2 = e.e2;
            s.einf = e.einf;
        } catch (const InvalidArgument&) {
            // No closed form for this model.
        }
        if (write) write_field_csv((fs::path(out_dir) / "stationary.csv").string(), st.density);
        break;
    }
    }

    if (write) {
        std::ofstream os(fs::path(out_dir) / "summary.json");
        os << s.to_json().dump(2) << '\n';
    }
    return s;
}

}  // namespace fpoc
