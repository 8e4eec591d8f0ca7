#include "fpoc/nonlocal.hpp"

#include <algorithm>
#include <utility>

#include "fpoc/error.hpp"

namespace fpoc {

NonlocalOperator::NonlocalOperator(const ModelSpec& model, GridPtr grid) : model_(&model), grid_(std::move(grid)) {
    const int dim = grid_->dim();
    if (model.dim() != dim) throw InvalidArgument("model and grid dimensions differ");
    std::vector<Point> centres(grid_->size());
    for (std::size_t idx = 0; idx < centres.size(); ++idx) centres[idx] = grid_->point(idx);

    for (int k = 0; k < dim; ++k) {
        const KernelSpec& kernel = model.kernels[static_cast<std::size_t>(k)];
        shapes_.push_back(kernel.shape());

        std::vector<Point> ifaces(grid_->size());
        for (int j = 0; j < grid_->count(1); ++j) {
            for (int i = 0; i < grid_->count(0); ++i) ifaces[grid_->index(i, j)] = grid_->interface_point(k, i, j);
        }
        interface_points_.push_back(ifaces);

        if (shapes_.back() == KernelShape::general) {
            centre_tables_.push_back(build_windows(kernel, centres, false));
            interface_tables_.push_back(build_windows(kernel, ifaces, false));
            adjoint_tables_.push_back(build_windows(kernel, centres, true));
        } else {
            centre_tables_.emplace_back();
            interface_tables_.emplace_back();
            adjoint_tables_.emplace_back();
        }
    }
}

NonlocalOperator::WindowTable NonlocalOperator::build_windows(const KernelSpec& kernel, std::vector<Point> targets,
                                                              bool swapped) const {
    const Grid& g = *grid_;
    const int dim = g.dim();
    const int n1 = g.count(0);
    const int n2 = g.count(1);
    const auto xs = g.centers(0);

    WindowTable table;
    table.windows.resize(targets.size() * static_cast<std::size_t>(n2));
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const Point& v = targets[t];
        const int mid = static_cast<int>(std::lower_bound(xs.begin(), xs.end(), v[0]) - xs.begin());
        for (int js = 0; js < n2; ++js) {
            const double ys = dim == 2 ? g.center(1, js) : 0.0;
            auto in = [&](int is) {
                const Point vs{xs[static_cast<std::size_t>(is)], ys};
                return swapped ? kernel.inside(vs, v, dim) : kernel.inside(v, vs, dim);
            };
            // Left of the target the support test flips false -> true, right of it true -> false.
            int lo = mid;
            {
                int a = 0, b = mid;
                while (a < b) {
                    const int m = (a + b) / 2;
                    if (in(m)) b = m; else a = m + 1;
                }
                lo = a;
            }
            int hi = mid;
            {
                int a = mid, b = n1;
                while (a < b) {
                    const int m = (a + b) / 2;
                    if (in(m)) a = m + 1; else b = m;
                }
                hi = a;
            }
            const Point probe{v[0], ys};
            Window w;
            w.lo = lo;
            w.hi = hi;
            w.weight = swapped ? kernel.weight(probe, v) : kernel.weight(v, probe);
            table.windows[t * static_cast<std::size_t>(n2) + static_cast<std::size_t>(js)] = w;
        }
    }
    table.points = std::move(targets);
    return table;
}

std::vector<double> NonlocalOperator::windowed_sum(const WindowTable& table, const ScalarField& a, int k,
                                                   bool swapped) const {
    const Grid& g = *grid_;
    const int n1 = g.count(0);
    const int n2 = g.count(1);
    const auto xs = g.centers(0);
    const auto un1 = static_cast<std::size_t>(n1);

    // Prefix sums per source row: S0 = sum a, S1 = sum x a.
    std::vector<double> s0((un1 + 1) * static_cast<std::size_t>(n2), 0.0);
    std::vector<double> s1(s0.size(), 0.0);
    for (int js = 0; js < n2; ++js) {
        const std::size_t base = static_cast<std::size_t>(js) * (un1 + 1);
        double c0 = 0.0, c1 = 0.0;
        for (int is = 0; is < n1; ++is) {
            const double val = a.at(is, js);
            c0 += val;
            c1 += xs[static_cast<std::size_t>(is)] * val;
            s0[base + static_cast<std::size_t>(is) + 1] = c0;
            s1[base + static_cast<std::size_t>(is) + 1] = c1;
        }
    }

    const double dv = g.cell_volume();
    const double sign = swapped ? -1.0 : 1.0;
    std::vector<double> out(table.points.size(), 0.0);
    for (std::size_t t = 0; t < table.points.size(); ++t) {
        const Point& v = table.points[t];
        double total = 0.0;
        for (int js = 0; js < n2; ++js) {
            const Window& w = table.windows[t * static_cast<std::size_t>(n2) + static_cast<std::size_t>(js)];
            if (w.lo >= w.hi || w.weight == 0.0) continue;
            const std::size_t base = static_cast<std::size_t>(js) * (un1 + 1);
            const double m0 = s0[base + static_cast<std::size_t>(w.hi)] - s0[base + static_cast<std::size_t>(w.lo)];
            double row;
            if (k == 0) {
                const double m1 =
                    s1[base + static_cast<std::size_t>(w.hi)] - s1[base + static_cast<std::size_t>(w.lo)];
                row = m1 - v[0] * m0;
            } else {
                row = (g.center(1, js) - v[1]) * m0;
            }
            total += w.weight * row;
        }
        out[t] = sign * total * dv;
    }
    return out;
}

std::vector<double> NonlocalOperator::moment_sum(const std::vector<Point>& targets, const ScalarField& a, int k,
                                                 bool swapped) const {
    const Grid& g = *grid_;
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t idx = 0; idx < a.size(); ++idx) {
        m0 += a[idx];
        m1 += g.point(idx)[static_cast<std::size_t>(k)] * a[idx];
    }
    const double dv = g.cell_volume();
    const double sign = swapped ? -1.0 : 1.0;
    std::vector<double> out(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        out[t] = sign * (m1 - targets[t][static_cast<std::size_t>(k)] * m0) * dv;
    }
    return out;
}

ScalarField NonlocalOperator::drift(const ScalarField& f, int k) const {
    const auto uk = static_cast<std::size_t>(k);
    const LocalDriftSpec& h = model_->local_drifts[uk];
    ScalarField out(grid_);
    switch (shapes_[uk]) {
    case KernelShape::zero:
        break;
    case KernelShape::constant_one: {
        std::vector<Point> centres(grid_->size());
        for (std::size_t idx = 0; idx < centres.size(); ++idx) centres[idx] = grid_->point(idx);
        out.values() = moment_sum(centres, f, k, false);
        break;
    }
    case KernelShape::general:
        out.values() = windowed_sum(centre_tables_[uk], f, k, false);
        break;
    }
    if (h.family != LocalDriftFamily::zero) {
        for (std::size_t idx = 0; idx < out.size(); ++idx) out[idx] += h(grid_->point(idx));
    }
    return out;
}

std::vector<double> NonlocalOperator::drift_at_interfaces(const ScalarField& f, int k) const {
    const auto uk = static_cast<std::size_t>(k);
    const LocalDriftSpec& h = model_->local_drifts[uk];
    const auto& pts = interface_points_[uk];
    std::vector<double> out(pts.size(), 0.0);
    switch (shapes_[uk]) {
    case KernelShape::zero:
        break;
    case KernelShape::constant_one:
        out = moment_sum(pts, f, k, false);
        break;
    case KernelShape::general:
        out = windowed_sum(interface_tables_[uk], f, k, false);
        break;
    }
    if (h.family != LocalDriftFamily::zero) {
        for (std::size_t t = 0; t < pts.size(); ++t) out[t] += h(pts[t]);
    }
    // Boundary faces carry no flux; keep their slots at zero.
    const Grid& g = *grid_;
    for (int j = 0; j < g.count(1); ++j) {
        for (int i = 0; i < g.count(0); ++i) {
            const int pos = k == 0 ? i : j;
            if (pos == g.count(k) - 1) out[g.index(i, j)] = 0.0;
        }
    }
    return out;
}

ScalarField NonlocalOperator::adjoint(const ScalarField& f, const ScalarField& dpsi_k, int k) const {
    const auto uk = static_cast<std::size_t>(k);
    ScalarField out(grid_);
    if (shapes_[uk] == KernelShape::zero) return out;
    ScalarField a = f;
    for (std::size_t idx = 0; idx < a.size(); ++idx) a[idx] *= dpsi_k[idx];
    if (shapes_[uk] == KernelShape::constant_one) {
        std::vector<Point> centres(grid_->size());
        for (std::size_t idx = 0; idx < centres.size(); ++idx) centres[idx] = grid_->point(idx);
        out.values() = moment_sum(centres, a, k, true);
    } else {
        out.values() = windowed_sum(adjoint_tables_[uk], a, k, true);
    }
    return out;
}

ScalarField nonlocal_drift(const ScalarField& f, const ModelSpec& model, int k) {
    return NonlocalOperator(model, f.grid_ptr()).drift(f, k);
}

ScalarField adjoint_nonlocal(const ScalarField& f, const ScalarField& psi, const ModelSpec& model, int k) {
    const VectorField grad = discrete_gradient(psi);
    return NonlocalOperator(model, f.grid_ptr()).adjoint(f, grad[k], k);
}

VectorField drift_total(const ScalarField& f, const VectorField& u, const ModelSpec& model) {
    NonlocalOperator op(model, f.grid_ptr());
    VectorField g(f.grid_ptr());
    for (int k = 0; k < model.dim(); ++k) {
        g[k] = op.drift(f, k);
        g[k] += u[k];
    }
    return g;
}

ScalarField nonlocal_drift_direct(const ScalarField& f, const ModelSpec& model, int k) {
    const Grid& g = f.grid();
    const auto uk = static_cast<std::size_t>(k);
    const KernelSpec& kernel = model.kernels[uk];
    ScalarField out(f.grid_ptr());
    for (std::size_t t = 0; t < f.size(); ++t) {
        const Point v = g.point(t);
        double s = 0.0;
        for (std::size_t q = 0; q < f.size(); ++q) {
            const Point vs = g.point(q);
            s += kernel(v, vs, g.dim()) * (vs[uk] - v[uk]) * f[q];
        }
        out[t] = model.local_drifts[uk](v) + s * g.cell_volume();
    }
    return out;
}

ScalarField adjoint_nonlocal_direct(const ScalarField& f, const ScalarField& dpsi_k, const ModelSpec& model, int k) {
    const Grid& g = f.grid();
    const auto uk = static_cast<std::size_t>(k);
    const KernelSpec& kernel = model.kernels[uk];
    ScalarField out(f.grid_ptr());
    for (std::size_t t = 0; t < f.size(); ++t) {
        const Point v = g.point(t);
        double s = 0.0;
        for (std::size_t q = 0; q < f.size(); ++q) {
            const Point vs = g.point(q);
            s += kernel(vs, v, g.dim()) * (v[uk] - vs[uk]) * f[q] * dpsi_k[q];
        }
        out[t] = s * g.cell_volume();
    }
    return out;
}

}  // namespace fpoc
