#include "fpoc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpoc/error.hpp"

namespace fpoc {

Domain::Domain(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
    if (intervals_.empty() || intervals_.size() > 2) {
        throw InvalidArgument("domain must have 1 or 2 dimensions, got " + std::to_string(intervals_.size()));
    }
    for (const auto& iv : intervals_) {
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi)) {
            throw InvalidArgument("degenerate interval [" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) + "]");
        }
    }
}

bool Domain::contains(const Point& p) const {
    for (int k = 0; k < dim(); ++k) {
        const auto kk = static_cast<std::size_t>(k);
        if (p[kk] < intervals_[kk].lo || p[kk] > intervals_[kk].hi) return false;
    }
    return true;
}

double Domain::measure() const {
    double m = 1.0;
    for (const auto& iv : intervals_) m *= iv.length();
    return m;
}

Grid::Grid(Domain domain, std::span<const int> counts) : domain_(std::move(domain)) {
    if (static_cast<int>(counts.size()) != domain_.dim()) {
        throw InvalidArgument("grid needs one count per dimension");
    }
    for (int k = 0; k < domain_.dim(); ++k) {
        const int n = counts[static_cast<std::size_t>(k)];
        if (n < 2) throw InvalidArgument("grid count must be >= 2, got " + std::to_string(n));
        const auto kk = static_cast<std::size_t>(k);
        counts_[kk] = n;
        steps_[kk] = domain_[k].length() / n;
        centers_[kk].resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            centers_[kk][static_cast<std::size_t>(i)] = domain_[k].lo + steps_[kk] * (i + 0.5);
        }
    }
    if (domain_.dim() == 1) {
        centers_[1] = {0.0};
    }
}

double Grid::min_step() const {
    return dim() == 2 ? std::min(steps_[0], steps_[1]) : steps_[0];
}

TimeGrid::TimeGrid(double horizon, double dt) : horizon_(horizon), dt_(dt) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
    // Absorb rounding in T/dt so that e.g. 4 / 0.0125 gives 320 steps, not 321.
    const double ratio = horizon / dt;
    steps_ = static_cast<int>(std::ceil(ratio * (1.0 - 1e-12)));
    steps_ = std::max(steps_, 1);
}

GridPtr build_grid(const Domain& domain, std::span<const int> counts) {
    return std::make_shared<const Grid>(domain, counts);
}

GridPtr build_grid_exponents(const Domain& domain, std::span<const int> exponents) {
    std::vector<int> counts;
    for (int e : exponents) {
        if (e < 1 || e > 20) throw InvalidArgument("grid exponent out of range: " + std::to_string(e));
        counts.push_back(1 << e);
    }
    return build_grid(domain, counts);
}

double suggest_dt(const Grid& grid, double kappa, double safety) {
    if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
    if (!(safety > 0.0) || safety > 1.0) throw InvalidArgument("safety must lie in (0, 1]");
    if (grid.dim() == 1) return safety * grid.step(0) / kappa;
    const double a = grid.step(0);
    const double b = grid.step(1);
    return safety * a * b / (kappa * (a + b));
}

double sl_compatibility_ratio(double d_max, double dt, double dv_min, double horizon) {
    if (!(d_max > 0.0) || !(dt > 0.0) || !(dv_min > 0.0) || !(horizon > 0.0)) {
        throw InvalidArgument("compatibility ratio needs positive inputs");
    }
    return std::cbrt(d_max) * dt / std::pow(horizon * dv_min, 2.0 / 3.0);
}

}  // namespace fpoc
