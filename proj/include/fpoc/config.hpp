#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fpoc/backward.hpp"
#include "fpoc/forward.hpp"
#include "fpoc/mesh.hpp"
#include "fpoc/model.hpp"
#include "fpoc/optimize.hpp"

namespace fpoc {

enum class RunMode { optimize, stationary, adjoint, forward };

struct DtRule {
    enum class Kind {
        /// dt = value * min dv
        ratio,
        /// dt = dv1 dv2 / (value (dv1 + dv2)), dv / value in 1D
        formula,
        /// dt = value
        fixed,
    };
    Kind kind = Kind::ratio;
    double value = 1.0;

    double resolve(const Grid& grid) const;
};

/// Prescribed control used by the adjoint and forward modes.
struct FixedControl {
    enum class Family {
        none,
        /// u_axis = (slope v_axis + offset)(T - t)
        affine_decay,
    };
    Family family = Family::none;
    int axis = 0;
    double slope = 0.0;
    double offset = 0.0;
};

struct SchemeSettings {
    int order = 2;
    double reflection_cbar = 1.0;
    int char_corrections = 1;
    double char_tol = 0.0;
    double fixed_point_tol = 1e-12;
    int fixed_point_max_iter = 50;
};

struct OptimizerSettings {
    double tol = 1e-5;
    int max_iter = 500;
    double lambda0 = 0.1;
    bool lagged_adjoint = true;
};

struct StationarySettings {
    double tol = 1e-12;
    int max_steps = 1000000;
};

struct Problem {
    std::string name;
    RunMode mode = RunMode::optimize;
    ModelSpec model;
    /// Cells per axis as base-2 exponents.
    std::vector<int> counts;
    DtRule dt_rule;
    ControlOptions control;
    FixedControl fixed_control;
    OptimizerSettings optimizer;
    SchemeSettings scheme;
    StationarySettings stationary;
    /// Output times as fractions of the horizon.
    std::vector<double> snapshots{0.0, 0.5, 1.0};

    GridPtr grid() const;
    TimeGrid time(const Grid& grid) const;
    ForwardOptions forward_options() const;
    BackwardOptions backward_options() const;
    OptimizeOptions optimize_options() const;
    /// The prescribed control sampled on the grid, zero when none is set.
    ControlTrajectory sampled_control(GridPtr grid, const TimeGrid& time) const;
};

nlohmann::json to_json(const Problem& problem);
Problem problem_from_json(const nlohmann::json& j);

Problem load_problem(const std::string& path);
void save_problem(const Problem& problem, const std::string& path);

/// Applies `a.b.0=value` to the JSON form; the value is parsed as JSON, falling back to a string.
void apply_override(nlohmann::json& j, std::string_view assignment);

const std::vector<std::string>& catalog_names();
Problem catalog(const std::string& name);

/// Either a catalog name or a path to a JSON file.
Problem resolve_problem(const std::string& name_or_path);

/// Switches the opinion-contacts penalty between "influencers" and "non-influencers".
void set_contact_penalty(Problem& problem, std::string_view variant);

}  // namespace fpoc
