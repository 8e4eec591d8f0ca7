#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpoc/config.hpp"
#include "fpoc/fields.hpp"
#include "fpoc/optimize.hpp"

namespace fpoc {

struct ConvergenceRow {
    int nv = 0;
    double e2 = 0.0;
    /// log2(E(previous row) / E(this row)); empty on the first row.
    std::optional<double> p2;
    double einf = 0.0;
    std::optional<double> pinf;
    double cpu_seconds = 0.0;
};

/// Closed-form steady state of the 1D model with P = 1, D = (sigma2/2)(1 - v^2)^2, evaluated
/// in log space at the cell centres and scaled to unit grid mass.
ScalarField stationary_oracle(double sigma2, double mean, GridPtr grid);

/// (J(u + eps du) - J(u - eps du)) / (2 eps) from two forward solves.
double fd_gradient_oracle(const ModelSpec& model, const ScalarField& f0, const ControlTrajectory& u,
                          const ControlTrajectory& du, double eps, const ForwardOptions& options = {});

struct GradientCheckRow {
    /// <gradient, du> in the space-time product.
    double adjoint = 0.0;
    double finite_difference = 0.0;
    double relative_error = 0.0;
};

enum class DirectionKind {
    /// Gaussian coefficients on products of Legendre polynomials of degree <= 2 in each of v and t.
    smooth,
    /// Independent Gaussian value per cell and time level.
    cellwise,
};

/// Compares the adjoint gradient at the problem's prescribed control (zero if none)
/// with central differences along `directions` seeded random directions.
std::vector<GradientCheckRow> gradient_check(const Problem& problem, double eps, int directions,
                                             std::uint64_t seed = 7, DirectionKind kind = DirectionKind::smooth);

struct Reference {
    enum class Kind { analytic, fine };
    Kind kind = Kind::analytic;
    int nv = 11;

    /// "analytic" or "fine:<nv>".
    static Reference parse(const std::string& text);
};

/// Stationary problems compare against the analytic steady state; adjoint
/// problems compare psi(., 0) against a fine-grid run whose density is also
/// the datum of every coarse run.
std::vector<ConvergenceRow> convergence_study(const Problem& problem, const std::vector<int>& nvs,
                                              const Reference& reference);

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);

struct RunSummary {
    double cost = 0.0;
    int iterations = 0;
    double f_min = 0.0;
    double e_int = 0.0;
    double step_mass_change = 0.0;
    double wall_seconds = 0.0;
    std::string stop_reason;
    std::vector<std::string> warnings;
    /// Stationary-mode steps and errors against the analytic state, when applicable.
    std::optional<int> stationary_steps;
    std::optional<double> e2;
    std::optional<double> einf;

    /// f_min >= -1e-14 and E_int <= 1e-12.
    bool invariants_ok() const;
    nlohmann::json to_json() const;
};

/// Runs the problem in its mode and, when `out_dir` is non-empty, writes the
/// iteration log, field snapshots and summary.json there.
RunSummary run_benchmark(const Problem& problem, const std::string& out_dir);

/// Cubic interpolation of a field onto the centres of another grid.
ScalarField restrict_field(const ScalarField& fine, GridPtr coarse);

}  // namespace fpoc
