#pragma once

#include <cstddef>
#include <vector>

#include "fpoc/fields.hpp"
#include "fpoc/model.hpp"

namespace fpoc {

/// Midpoint quadrature of the interaction integrals on a fixed grid.
///
/// Every non-trivial kernel family has, for a fixed pair of second coordinates,
/// a support that is a closed interval in v1* and a weight independent of v1*.
/// The operator precomputes those windows once per grid and evaluates each
/// integral from per-row prefix sums, O(N_1 N_2^2) per call instead of O(N^2).
class NonlocalOperator {
public:
    NonlocalOperator(const ModelSpec& model, GridPtr grid);

    const Grid& grid() const { return *grid_; }
    KernelShape shape(int k) const { return shapes_[static_cast<std::size_t>(k)]; }

    /// P_k[f] at cell centres, local drift included.
    ScalarField drift(const ScalarField& f, int k) const;

    /// P_k[f] at the interior interfaces along axis k, indexed by the lower cell.
    /// Entries for the last cell along the axis are left at zero.
    std::vector<double> drift_at_interfaces(const ScalarField& f, int k) const;

    /// Q_k[f, psi] given the partial derivative d_k psi at cell centres.
    ScalarField adjoint(const ScalarField& f, const ScalarField& dpsi_k, int k) const;

private:
    struct Window {
        int lo = 0;
        int hi = 0;
        double weight = 0.0;
    };
    /// One window per (target, source row); targets are flat indices into `points`.
    struct WindowTable {
        std::vector<Point> points;
        std::vector<Window> windows;
    };

    WindowTable build_windows(const KernelSpec& kernel, std::vector<Point> targets, bool swapped) const;
    /// sum over source cells of P(target, v*) (v*_k - target_k) a(v*) dV, with
    /// the sign flipped when `swapped` (adjoint orientation).
    std::vector<double> windowed_sum(const WindowTable& table, const ScalarField& a, int k, bool swapped) const;
    std::vector<double> moment_sum(const std::vector<Point>& targets, const ScalarField& a, int k, bool swapped) const;

    const ModelSpec* model_;
    GridPtr grid_;
    std::vector<KernelShape> shapes_;
    std::vector<WindowTable> centre_tables_;
    std::vector<WindowTable> interface_tables_;
    std::vector<WindowTable> adjoint_tables_;
    std::vector<std::vector<Point>> interface_points_;
};

/// h_k + sum_{v*} P_k(v, v*) (v*_k - v_k) f(v*) dV at every cell centre.
ScalarField nonlocal_drift(const ScalarField& f, const ModelSpec& model, int k);

/// sum_{v*} P_k(v*, v) (v_k - v*_k) f(v*) d_k psi(v*) dV with the discrete gradient of psi.
ScalarField adjoint_nonlocal(const ScalarField& f, const ScalarField& psi, const ModelSpec& model, int k);

/// G_k = P_k[f] + u_k for every component.
VectorField drift_total(const ScalarField& f, const VectorField& u, const ModelSpec& model);

/// Direct O(N^2) double loop over cell pairs; reference for the fast paths.
ScalarField nonlocal_drift_direct(const ScalarField& f, const ModelSpec& model, int k);
ScalarField adjoint_nonlocal_direct(const ScalarField& f, const ScalarField& dpsi_k, const ModelSpec& model, int k);

}  // namespace fpoc
