#include "fpoc/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <utility>

#include "fpoc/error.hpp"

namespace fpoc {

using nlohmann::json;

namespace {

template <typename E>
using EnumTable = std::vector<std::pair<E, const char*>>;

template <typename E>
std::string enum_name(const EnumTable<E>& table, E value) {
    for (const auto& [e, s] : table) {
        if (e == value) return s;
    }
    throw InvalidArgument("unnamed enum value");
}

template <typename E>
E enum_value(const EnumTable<E>& table, const json& j, const char* what) {
    const std::string s = j.get<std::string>();
    for (const auto& [e, name] : table) {
        if (s == name) return e;
    }
    throw InvalidArgument(std::string("unknown ") + what + " '" + s + "'");
}

const EnumTable<RunMode> kModes{{RunMode::optimize, "optimize"},
                                {RunMode::stationary, "stationary"},
                                {RunMode::adjoint, "adjoint"},
                                {RunMode::forward, "forward"}};
const EnumTable<DtRule::Kind> kDtKinds{
    {DtRule::Kind::ratio, "ratio"}, {DtRule::Kind::formula, "formula"}, {DtRule::Kind::fixed, "fixed"}};
const EnumTable<KernelFamily> kKernels{{KernelFamily::zero, "zero"},
                                       {KernelFamily::one, "one"},
                                       {KernelFamily::indicator, "indicator"},
                                       {KernelFamily::contact_weighted, "contact_weighted"}};
const EnumTable<LocalDriftFamily> kDrifts{{LocalDriftFamily::zero, "zero"},
                                          {LocalDriftFamily::log_growth, "log_growth"}};
const EnumTable<DiffusionFactorKind> kFactors{{DiffusionFactorKind::one_minus_square, "one_minus_square"},
                                              {DiffusionFactorKind::monomial, "monomial"}};
const EnumTable<PenaltyFamily> kPenalties{
    {PenaltyFamily::zero, "zero"}, {PenaltyFamily::one, "one"}, {PenaltyFamily::logistic, "logistic"}};
const EnumTable<InitialFamily> kInitials{{InitialFamily::uniform, "uniform"},
                                         {InitialFamily::gaussian_mix, "gaussian_mix"}};
const EnumTable<GradientForm> kGradientForms{{GradientForm::f_weighted, "f_weighted"},
                                             {GradientForm::plain, "plain"}};
const EnumTable<FixedControl::Family> kFixedControls{{FixedControl::Family::none, "none"},
                                                     {FixedControl::Family::affine_decay, "affine_decay"}};

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
    const auto it = j.find(key);
    return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

const json& require(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw InvalidArgument(std::string("missing config key '") + key + "'");
    return *it;
}

json kernel_json(const KernelSpec& k) {
    json j{{"family", enum_name(kKernels, k.family)}};
    if (k.family == KernelFamily::indicator || k.family == KernelFamily::contact_weighted) j["radius"] = k.radius;
    return j;
}

KernelSpec kernel_from(const json& j) {
    KernelSpec k;
    k.family = enum_value(kKernels, require(j, "family"), "kernel family");
    k.radius = value_or(j, "radius", 0.0);
    return k;
}

json drift_json(const LocalDriftSpec& h) {
    json j{{"family", enum_name(kDrifts, h.family)}};
    if (h.family == LocalDriftFamily::log_growth) {
        j["coefficient"] = h.coefficient;
        j["reference"] = h.reference;
        j["axis"] = h.axis;
    }
    return j;
}

LocalDriftSpec drift_from(const json& j) {
    LocalDriftSpec h;
    h.family = enum_value(kDrifts, require(j, "family"), "local drift family");
    h.coefficient = value_or(j, "coefficient", 0.0);
    h.reference = value_or(j, "reference", 1.0);
    h.axis = value_or(j, "axis", 0);
    return h;
}

json diffusion_json(const DiffusionSpec& d) {
    json factors = json::array();
    for (const auto& f : d.factors) {
        factors.push_back({{"kind", enum_name(kFactors, f.kind)}, {"axis", f.axis}, {"power", f.power}});
    }
    return {{"scale", d.scale}, {"factors", factors}};
}

DiffusionSpec diffusion_from(const json& j) {
    DiffusionSpec d;
    d.scale = require(j, "scale").get<double>();
    for (const auto& f : value_or(j, "factors", json::array())) {
        DiffusionFactor factor;
        factor.kind = enum_value(kFactors, require(f, "kind"), "diffusion factor");
        factor.axis = value_or(f, "axis", 0);
        factor.power = value_or(f, "power", 1);
        d.factors.push_back(factor);
    }
    return d;
}

json penalty_json(const PenaltySpec& s) {
    json j{{"family", enum_name(kPenalties, s.family)}};
    if (s.family == PenaltyFamily::logistic) {
        j["axis"] = s.axis;
        j["slope"] = s.slope;
        j["center"] = s.center;
    }
    return j;
}

PenaltySpec penalty_from(const json& j) {
    PenaltySpec s;
    s.family = enum_value(kPenalties, require(j, "family"), "penalty family");
    s.axis = value_or(j, "axis", 0);
    s.slope = value_or(j, "slope", 0.0);
    s.center = value_or(j, "center", 0.0);
    return s;
}

json initial_json(const InitialSpec& init) {
    json j{{"family", enum_name(kInitials, init.family)}};
    if (init.family == InitialFamily::gaussian_mix) {
        json terms = json::array();
        for (const auto& t : init.terms) {
            terms.push_back({{"center", t.center},
                             {"scale", t.scale},
                             {"rho", t.rho},
                             {"cross", t.cross},
                             {"weight", t.weight}});
        }
        j["terms"] = terms;
    }
    return j;
}

InitialSpec initial_from(const json& j) {
    InitialSpec init;
    init.family = enum_value(kInitials, require(j, "family"), "initial family");
    for (const auto& t : value_or(j, "terms", json::array())) {
        GaussianTerm term;
        term.center = value_or(t, "center", term.center);
        term.scale = value_or(t, "scale", term.scale);
        term.rho = value_or(t, "rho", 0.0);
        term.cross = value_or(t, "cross", 0.0);
        term.weight = value_or(t, "weight", 1.0);
        init.terms.push_back(term);
    }
    return init;
}

template <typename T, typename F>
json list_json(const std::vector<T>& items, F fn) {
    json a = json::array();
    for (const auto& item : items) a.push_back(fn(item));
    return a;
}

template <typename F>
auto list_from(const json& j, F fn) {
    std::vector<decltype(fn(j))> out;
    for (const auto& item : j) out.push_back(fn(item));
    return out;
}

}  // namespace

double DtRule::resolve(const Grid& grid) const {
    if (!(value > 0.0)) throw InvalidArgument("dt rule value must be positive");
    switch (kind) {
    case Kind::ratio:
        return value * grid.min_step();
    case Kind::formula:
        return suggest_dt(grid, value);
    case Kind::fixed:
        return value;
    }
    return value;
}

GridPtr Problem::grid() const {
    return build_grid_exponents(model.domain, counts);
}

TimeGrid Problem::time(const Grid& grid) const {
    return TimeGrid(model.horizon, dt_rule.resolve(grid));
}

ForwardOptions Problem::forward_options() const {
    ForwardOptions o;
    o.order = scheme.order;
    return o;
}

BackwardOptions Problem::backward_options() const {
    BackwardOptions o;
    o.order = scheme.order;
    o.reflection.cbar = scheme.reflection_cbar;
    o.char_corrections = scheme.char_corrections;
    o.char_tol = scheme.char_tol;
    o.fixed_point_tol = scheme.fixed_point_tol;
    o.fixed_point_max_iter = scheme.fixed_point_max_iter;
    return o;
}

OptimizeOptions Problem::optimize_options() const {
    OptimizeOptions o;
    o.tol = optimizer.tol;
    o.max_iter = optimizer.max_iter;
    o.lambda0 = optimizer.lambda0;
    o.lagged_adjoint = optimizer.lagged_adjoint;
    o.control = control;
    o.forward = forward_options();
    o.backward = backward_options();
    return o;
}

ControlTrajectory Problem::sampled_control(GridPtr grid, const TimeGrid& time) const {
    ControlTrajectory u = zero_control(grid, time);
    if (fixed_control.family == FixedControl::Family::none) return u;
    const auto axis = static_cast<std::size_t>(fixed_control.axis);
    if (fixed_control.axis < 0 || fixed_control.axis >= grid->dim()) throw InvalidArgument("fixed control axis out of range");
    for (int n = 0; n <= time.steps(); ++n) {
        const double decay = model.horizon - time.time(n);
        ScalarField& uk = u[n][fixed_control.axis];
        for (std::size_t idx = 0; idx < uk.size(); ++idx) {
            uk[idx] = (fixed_control.slope * grid->point(idx)[axis] + fixed_control.offset) * decay;
        }
    }
    return u;
}

json to_json(const Problem& p) {
    const ModelSpec& m = p.model;
    json domain = json::array();
    for (const auto& iv : m.domain.intervals()) domain.push_back({iv.lo, iv.hi});
    json active = json::array();
    for (int k = 0; k < m.dim(); ++k) active.push_back(p.control.active[static_cast<std::size_t>(k)]);

    json fixed = nullptr;
    if (p.fixed_control.family != FixedControl::Family::none) {
        fixed = {{"family", enum_name(kFixedControls, p.fixed_control.family)},
                 {"axis", p.fixed_control.axis},
                 {"slope", p.fixed_control.slope},
                 {"offset", p.fixed_control.offset}};
    }
    return {
        {"name", p.name},
        {"mode", enum_name(kModes, p.mode)},
        {"domain", domain},
        {"counts", p.counts},
        {"dt_rule", {{"kind", enum_name(kDtKinds, p.dt_rule.kind)}, {"value", p.dt_rule.value}}},
        {"horizon", m.horizon},
        {"kernel", list_json(m.kernels, kernel_json)},
        {"local_drift", list_json(m.local_drifts, drift_json)},
        {"diffusion", list_json(m.diffusions, diffusion_json)},
        {"initial", initial_json(m.initial)},
        {"cost", {{"penalty", list_json(m.penalties, penalty_json)}, {"targets", m.targets}, {"gamma", m.gamma}}},
        {"control",
         {{"bound", std::isfinite(p.control.bound) ? json(p.control.bound) : json(nullptr)},
          {"gradient_form", enum_name(kGradientForms, p.control.gradient_form)},
          {"active", active},
          {"fixed", fixed}}},
        {"optimizer",
         {{"tol", p.optimizer.tol},
          {"max_iter", p.optimizer.max_iter},
          {"lambda0", p.optimizer.lambda0},
          {"lagged_adjoint", p.optimizer.lagged_adjoint}}},
        {"scheme",
         {{"order", p.scheme.order},
          {"reflection_cbar", p.scheme.reflection_cbar},
          {"char_corrections", p.scheme.char_corrections},
          {"char_tol", p.scheme.char_tol},
          {"sl_fixed_point", {{"tol", p.scheme.fixed_point_tol}, {"max_iter", p.scheme.fixed_point_max_iter}}}}},
        {"stationary", {{"tol", p.stationary.tol}, {"max_steps", p.stationary.max_steps}}},
        {"snapshots", p.snapshots},
    };
}

Problem problem_from_json(const json& j) {
    try {
        Problem p;
        p.name = value_or<std::string>(j, "name", "custom");
        p.mode = enum_value(kModes, require(j, "mode"), "mode");

        std::vector<Interval> ivs;
        for (const auto& iv : require(j, "domain")) {
            if (!iv.is_array() || iv.size() != 2) throw InvalidArgument("domain entries must be [lo, hi] pairs");
            ivs.push_back({iv[0].get<double>(), iv[1].get<double>()});
        }
        ModelSpec& m = p.model;
        m.domain = Domain(ivs);
        p.counts = require(j, "counts").get<std::vector<int>>();

        const json& dt = require(j, "dt_rule");
        p.dt_rule.kind = enum_value(kDtKinds, require(dt, "kind"), "dt rule");
        p.dt_rule.value = require(dt, "value").get<double>();

        m.horizon = require(j, "horizon").get<double>();
        m.kernels = list_from(require(j, "kernel"), kernel_from);
        m.local_drifts = list_from(require(j, "local_drift"), drift_from);
        m.diffusions = list_from(require(j, "diffusion"), diffusion_from);
        m.initial = initial_from(require(j, "initial"));

        const json& c = require(j, "cost");
        m.penalties = list_from(require(c, "penalty"), penalty_from);
        m.targets = require(c, "targets").get<std::vector<double>>();
        m.gamma = require(c, "gamma").get<double>();

        const json ctl = value_or(j, "control", json::object());
        p.control.bound = value_or(ctl, "bound", std::numeric_limits<double>::infinity());
        if (ctl.contains("gradient_form")) {
            p.control.gradient_form = enum_value(kGradientForms, ctl["gradient_form"], "gradient form");
        }
        const auto active = value_or(ctl, "active", std::vector<bool>{});
        for (std::size_t k = 0; k < active.size() && k < 2; ++k) p.control.active[k] = active[k];
        const json fixed = value_or(ctl, "fixed", json(nullptr));
        if (!fixed.is_null()) {
            p.fixed_control.family = enum_value(kFixedControls, require(fixed, "family"), "fixed control");
            p.fixed_control.axis = value_or(fixed, "axis", 0);
            p.fixed_control.slope = value_or(fixed, "slope", 0.0);
            p.fixed_control.offset = value_or(fixed, "offset", 0.0);
        }

        const json opt = value_or(j, "optimizer", json::object());
        p.optimizer.tol = value_or(opt, "tol", p.optimizer.tol);
        p.optimizer.max_iter = value_or(opt, "max_iter", p.optimizer.max_iter);
        p.optimizer.lambda0 = value_or(opt, "lambda0", p.optimizer.lambda0);
        p.optimizer.lagged_adjoint = value_or(opt, "lagged_adjoint", p.optimizer.lagged_adjoint);

        const json sch = value_or(j, "scheme", json::object());
        p.scheme.order = value_or(sch, "order", p.scheme.order);
        p.scheme.reflection_cbar = value_or(sch, "reflection_cbar", p.scheme.reflection_cbar);
        p.scheme.char_corrections = value_or(sch, "char_corrections", p.scheme.char_corrections);
        p.scheme.char_tol = value_or(sch, "char_tol", p.scheme.char_tol);
        const json fp = value_or(sch, "sl_fixed_point", json::object());
        p.scheme.fixed_point_tol = value_or(fp, "tol", p.scheme.fixed_point_tol);
        p.scheme.fixed_point_max_iter = value_or(fp, "max_iter", p.scheme.fixed_point_max_iter);

        const json st = value_or(j, "stationary", json::object());
        p.stationary.tol = value_or(st, "tol", p.stationary.tol);
        p.stationary.max_steps = value_or(st, "max_steps", p.stationary.max_steps);
        p.snapshots = value_or(j, "snapshots", p.snapshots);

        if (p.counts.size() != static_cast<std::size_t>(m.dim())) throw InvalidArgument("counts must list one exponent per dimension");
        if (m.kernels.size() != p.counts.size()) throw InvalidArgument("kernel list must have one entry per dimension");
        return p;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed config: ") + e.what());
    }
}

Problem load_problem(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidArgument("cannot open config " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw InvalidArgument("config " + path + " is not valid JSON: " + e.what());
    }
    return problem_from_json(j);
}

void save_problem(const Problem& problem, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << to_json(problem).dump(2) << '\n';
}

void apply_override(json& j, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) throw InvalidArgument("override must look like key.path=value");
    const std::string key(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    std::string pointer;
    std::size_t pos = 0;
    while (pos <= key.size()) {
        const auto dot = key.find('.', pos);
        const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (part.empty()) throw InvalidArgument("empty segment in override key '" + key + "'");
        pointer += "/" + part;
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    try {
        j[json::json_pointer(pointer)] = value;
    } catch (const json::exception& e) {
        throw InvalidArgument("cannot apply override '" + key + "': " + e.what());
    }
}

const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names{"stationary-1d", "hjb-order-1d", "order-compare-1d",
                                                "opinion-contacts-2d", "bivariate-opinion-2d"};
    return names;
}

namespace {

DiffusionFactor one_minus_square(int axis, int power) {
    return {DiffusionFactorKind::one_minus_square, axis, power};
}

Problem base_1d(std::string name, RunMode mode) {
    Problem p;
    p.name = std::move(name);
    p.mode = mode;
    p.model.domain = Domain({{-1.0, 1.0}});
    p.model.local_drifts = {LocalDriftSpec{}};
    return p;
}

}  // namespace

Problem catalog(const std::string& name) {
    if (name == "stationary-1d") {
        Problem p = base_1d(name, RunMode::stationary);
        p.counts = {6};
        p.dt_rule = {DtRule::Kind::ratio, 0.5};
        p.model.horizon = 1.0;
        p.model.kernels = {{KernelFamily::one, 0.0}};
        p.model.diffusions = {{0.02 / 2.0, {one_minus_square(0, 2)}}};
        p.model.penalties = {PenaltySpec{}};
        p.model.targets = {0.0};
        p.model.gamma = 1.0;
        p.model.initial = {InitialFamily::uniform, {}};
        return p;
    }
    if (name == "hjb-order-1d") {
        Problem p = base_1d(name, RunMode::adjoint);
        p.counts = {6};
        p.dt_rule = {DtRule::Kind::ratio, 1.0};
        p.model.horizon = 1.0;
        p.model.kernels = {{KernelFamily::one, 0.0}};
        p.model.diffusions = {{0.01 / 2.0, {one_minus_square(0, 2)}}};
        p.model.penalties = {{PenaltyFamily::one}};
        p.model.targets = {0.2};
        p.model.gamma = 0.05;
        GaussianTerm g;
        g.center = {-0.5, 0.0};
        g.scale = {0.5, 1.0};
        p.model.initial = {InitialFamily::gaussian_mix, {g}};
        p.fixed_control = {FixedControl::Family::affine_decay, 0, -2.5, 0.5};
        return p;
    }
    if (name == "order-compare-1d") {
        Problem p = base_1d(name, RunMode::optimize);
        p.counts = {4};
        p.dt_rule = {DtRule::Kind::ratio, 0.1};
        p.model.horizon = 4.0;
        p.model.kernels = {{KernelFamily::indicator, 0.1}};
        p.model.diffusions = {{5e-3, {one_minus_square(0, 1)}}};
        p.model.penalties = {{PenaltyFamily::one}};
        p.model.targets = {0.3};
        p.model.gamma = 1.0;
        p.model.initial = {InitialFamily::uniform, {}};
        return p;
    }
    if (name == "opinion-contacts-2d") {
        Problem p;
        p.name = name;
        p.mode = RunMode::optimize;
        p.model.domain = Domain({{-1.0, 1.0}, {1.0, 40.0}});
        p.counts = {6, 6};
        p.dt_rule = {DtRule::Kind::formula, 10.0};
        p.model.horizon = 3.0;
        p.model.kernels = {{KernelFamily::contact_weighted, 2.0}, {KernelFamily::zero, 0.0}};
        p.model.local_drifts = {LocalDriftSpec{},
                                {LocalDriftFamily::log_growth, -0.1 / 2.0, 20.0, 1}};
        p.model.diffusions = {{2e-3 / 2.0, {one_minus_square(0, 1)}},
                              {2e-3 / 2.0, {{DiffusionFactorKind::monomial, 1, 2}}}};
        p.model.penalties = {{PenaltyFamily::logistic, 1, -0.5, 20.0}, PenaltySpec{}};
        p.model.targets = {0.3, 0.0};
        p.model.gamma = 0.05;
        GaussianTerm a, b, c;
        a.center = {-0.5, 10.0};
        a.scale = {0.1, 5.0};
        a.rho = 0.5;
        a.cross = 1.0;
        b.center = {0.75, 50.0};
        b.scale = {0.1, 5.0};
        b.rho = 0.5;
        b.cross = -1.0;
        c.center = {-0.75, 50.0};
        c.scale = {0.1, 5.0};
        c.rho = 0.75;
        c.cross = -1.5;
        p.model.initial = {InitialFamily::gaussian_mix, {a, b, c}};
        p.control.active = {true, false};
        return p;
    }
    if (name == "bivariate-opinion-2d") {
        Problem p;
        p.name = name;
        p.mode = RunMode::optimize;
        p.model.domain = Domain({{-1.0, 1.0}, {-1.0, 1.0}});
        p.counts = {4, 4};
        p.dt_rule = {DtRule::Kind::formula, 10.0};
        p.model.horizon = 2.0;
        p.model.kernels = {{KernelFamily::indicator, 1.0}, {KernelFamily::indicator, 1.0}};
        p.model.local_drifts = {LocalDriftSpec{}, LocalDriftSpec{}};
        const DiffusionSpec d{2e-2 / 2.0, {one_minus_square(0, 1), one_minus_square(1, 1)}};
        p.model.diffusions = {d, d};
        p.model.penalties = {{PenaltyFamily::one}, {PenaltyFamily::one}};
        p.model.targets = {0.6, 0.6};
        p.model.gamma = 0.05;
        GaussianTerm a, b;
        a.center = {-0.5, 0.5};
        a.scale = {0.1, 0.1};
        a.rho = 0.5;
        a.cross = 1.0;
        b.center = {0.5, -0.5};
        b.scale = {0.1, 0.1};
        b.rho = 0.5;
        b.cross = 1.0;
        p.model.initial = {InitialFamily::gaussian_mix, {a, b}};
        p.control.active = {true, true};
        return p;
    }
    throw InvalidArgument("unknown catalog entry '" + name + "'");
}

Problem resolve_problem(const std::string& name_or_path) {
    for (const auto& n : catalog_names()) {
        if (n == name_or_path) return catalog(n);
    }
    return load_problem(name_or_path);
}

void set_contact_penalty(Problem& problem, std::string_view variant) {
    PenaltySpec& s = problem.model.penalties.at(0);
    if (s.family != PenaltyFamily::logistic) throw InvalidArgument("problem has no logistic contact penalty");
    if (variant == "influencers") {
        s.slope = 0.5;
    } else if (variant == "non-influencers") {
        s.slope = -0.5;
    } else {
        throw InvalidArgument("penalty variant must be 'influencers' or 'non-influencers'");
    }
}

}  // namespace fpoc
