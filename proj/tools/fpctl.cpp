#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpoc/config.hpp"
#include "fpoc/error.hpp"
#include "fpoc/harness.hpp"

using namespace fpoc;
namespace fs = std::filesystem;

namespace {

// "4..8" or "4,5,7".
std::vector<int> parse_levels(const std::string& text) {
    std::vector<int> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int a = std::stoi(text.substr(0, dots));
        const int b = std::stoi(text.substr(dots + 2));
        if (b < a) throw InvalidArgument("empty range " + text);
        for (int n = a; n <= b; ++n) out.push_back(n);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

Problem load_with_overrides(const std::string& source, const std::vector<std::string>& overrides) {
    Problem p = resolve_problem(source);
    if (overrides.empty()) return p;
    nlohmann::json j = to_json(p);
    for (const auto& o : overrides) apply_override(j, o);
    return problem_from_json(j);
}

void print_rows(const std::vector<ConvergenceRow>& rows) {
    std::cout << std::setw(4) << "nv" << std::setw(14) << "E2" << std::setw(8) << "p2" << std::setw(14) << "Einf"
              << std::setw(8) << "pinf" << std::setw(12) << "cpu[s]" << '\n';
    for (const auto& r : rows) {
        auto order = [](const std::optional<double>& p) {
            std::ostringstream os;
            if (p) os << std::fixed << std::setprecision(2) << *p;
            return os.str();
        };
        std::cout << std::setw(4) << r.nv << std::setw(14) << std::scientific << std::setprecision(4) << r.e2
                  << std::setw(8) << order(r.p2) << std::setw(14) << std::scientific << r.einf << std::setw(8)
                  << order(r.pinf) << std::setw(12) << std::defaultfloat << std::setprecision(3) << r.cpu_seconds
                  << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal control of nonlocal Fokker-Planck equations"};
    app.require_subcommand(1);

    std::string source;
    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "Run a catalog benchmark or JSON config and write its artifacts");
    std::string out_dir;
    int order = 0;
    int nv = 0;
    std::string penalty;
    bool uncontrolled = false;
    run->add_option("config", source, "Catalog name or JSON path")->required();
    run->add_option("--override", overrides, "key.path=value applied to the JSON form");
    run->add_option("--order", order, "Scheme order for both solvers")->check(CLI::IsMember({1, 2}));
    run->add_option("--nv", nv, "log2 of the cell count on every axis")->check(CLI::Range(2, 14));
    run->add_option("--penalty", penalty, "Contacts penalty variant")
        ->check(CLI::IsMember({"influencers", "non-influencers"}));
    run->add_flag("--uncontrolled", uncontrolled, "Forward solve with zero control");
    run->add_option("--out", out_dir, "Output directory (default runs/<name>)");

    auto* conv = app.add_subcommand("convergence", "Error table over a range of resolutions");
    std::string levels = "4..8";
    std::string reference;
    std::string csv_path;
    conv->add_option("config", source, "Catalog name or JSON path")->required();
    conv->add_option("--override", overrides, "key.path=value applied to the JSON form");
    conv->add_option("--nv", levels, "Resolutions as a..b or a,b,c");
    conv->add_option("--reference", reference, "analytic or fine:<nv>");
    conv->add_option("--csv", csv_path, "Write the table as CSV");

    auto* oracle = app.add_subcommand("oracle", "Closed-form reference fields");
    auto* stationary = oracle->add_subcommand("stationary", "Steady state of the 1D opinion model");
    oracle->require_subcommand(1);
    double sigma2 = 0.02;
    double mean = 0.0;
    int oracle_nv = 10;
    stationary->add_option("--sigma2", sigma2, "Diffusion strength")->check(CLI::PositiveNumber);
    stationary->add_option("--mean", mean, "Conserved mean opinion");
    stationary->add_option("--nv", oracle_nv, "log2 of the cell count")->check(CLI::Range(2, 20));

    auto* grad = app.add_subcommand("gradcheck", "Adjoint gradient against central differences");
    double eps = 1e-5;
    int directions = 3;
    double grad_tol = 1e-3;
    std::uint64_t seed = 7;
    grad->add_option("config", source, "Catalog name or JSON path")->required();
    grad->add_option("--override", overrides, "key.path=value applied to the JSON form");
    grad->add_option("--eps", eps, "Finite-difference step")->check(CLI::PositiveNumber);
    grad->add_option("--directions", directions, "Number of random directions")->check(CLI::PositiveNumber);
    grad->add_option("--tol", grad_tol, "Largest accepted relative error");
    grad->add_option("--seed", seed, "Direction seed");
    bool cellwise = false;
    grad->add_flag("--cellwise", cellwise, "White-noise directions instead of smooth ones");

    auto* cat = app.add_subcommand("catalog", "List catalog benchmarks or print one as JSON");
    std::string cat_name;
    cat->add_option("name", cat_name, "Benchmark name");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            Problem p = load_with_overrides(source, overrides);
            if (order != 0) p.scheme.order = order;
            if (nv != 0) p.counts.assign(p.counts.size(), nv);
            if (!penalty.empty()) set_contact_penalty(p, penalty);
            if (uncontrolled) {
                p.mode = RunMode::forward;
                p.fixed_control = FixedControl{};
            }
            if (out_dir.empty()) out_dir = (fs::path("runs") / (p.name.empty() ? "run" : p.name)).string();
            const RunSummary s = run_benchmark(p, out_dir);
            std::cout << s.to_json().dump(2) << '\n';
            for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
            if (!s.invariants_ok()) {
                std::cerr << "invariant violated: f_min = " << s.f_min << ", E_int = " << s.e_int << '\n';
                return 2;
            }
            return 0;
        }
        if (*conv) {
            const Problem p = load_with_overrides(source, overrides);
            if (reference.empty()) reference = p.mode == RunMode::stationary ? "analytic" : "fine:11";
            const auto rows = convergence_study(p, parse_levels(levels), Reference::parse(reference));
            print_rows(rows);
            if (!csv_path.empty()) write_convergence_csv(csv_path, rows);
            return 0;
        }
        if (*oracle) {
            const Interval unit{-1.0, 1.0};
            const int exps[] = {oracle_nv};
            const ScalarField f = stationary_oracle(sigma2, mean, build_grid_exponents(Domain({unit}), exps));
            write_field_csv(std::cout, f);
            return 0;
        }
        if (*grad) {
            const Problem p = load_with_overrides(source, overrides);
            const auto rows = gradient_check(p, eps, directions, seed, cellwise ? DirectionKind::cellwise : DirectionKind::smooth);
            bool ok = true;
            std::cout << "direction,adjoint,finite_difference,relative_error\n" << std::setprecision(12);
            for (std::size_t d = 0; d < rows.size(); ++d) {
                std::cout << d << ',' << rows[d].adjoint << ',' << rows[d].finite_difference << ','
                          << rows[d].relative_error << '\n';
                ok = ok && rows[d].relative_error <= grad_tol;
            }
            return ok ? 0 : 2;
        }
        if (*cat) {
            if (cat_name.empty()) {
                for (const auto& n : catalog_names()) std::cout << n << '\n';
            } else {
                std::cout << to_json(catalog(cat_name)).dump(2) << '\n';
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
