#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wlab/check_report.hpp"
#include "wlab/geometry.hpp"
#include "wlab/heat_flow.hpp"
#include "wlab/witten_operator.hpp"

namespace wlab {

/// 2K/(1 - exp(-2Kt)); the K -> 0 limit 1/t is used when 2Kt underflows.
double harnack_coefficient(double K, double t);

/// 1/t + 2K.
double hamilton_coefficient(double K, double t);

/// psi(t) = (1 - exp(-2Kt))/(2K), the reciprocal of harnack_coefficient; t at K = 0.
double harnack_psi(double K, double t);

/// x/sinh(x) with the value 1 at x = 0.
double x_over_sinh(double x);

/// (m-1)^2 K / 8.
double lambda_km(double K, double m);

/// Nodes with u < kUnderflowClamp * A are excluded from pointwise checks.
inline constexpr double kUnderflowClamp = 1e-300;

/// |grad log u|^2 <= 2K/(1-e^{-2Kt}) log(A/u) over every stored (t > 0, x).
CheckReport harnack_improved(const ModelSpace& space, const HeatSolution& sol, double K,
                             double tol = 1e-6);

/// |grad log u|^2 <= (1/t + 2K) log(A/u), plus coefficient dominance on `t_grid`
/// recorded in constants["dominance_margin"].
CheckReport harnack_hamilton(const ModelSpace& space, const HeatSolution& sol, double K,
                             double tol = 1e-6);

/// min over t of (2K + 1/t) - 2K/(1-e^{-2Kt}); exact evaluation, no tolerance.
double coefficient_dominance_margin(double K, std::span<const double> t_grid);

/// |grad P_T f|^2 / P_T f <= 2K/(1-e^{-2KT}) (P_T(f log f) - P_T f log P_T f)
/// for each T in `T_grid`. Nodes with P_T f below 1e-12 of its maximum are
/// counted in constants["unresolved"] and skipped.
CheckReport lsi_semigroup(const ModelSpace& space, const HeatKernel& kern,
                          std::span<const double> f0, double K, std::span<const double> T_grid,
                          double tol = 1e-6);

/// Dimension of the numerical null space of L, counting eigenvalues with
/// |lambda| <= 1e-8 * lambda_max. Passes iff the dimension is 1.
CheckReport liouville_check(const ModelSpace& space, const DiscreteOperator& op);
CheckReport liouville_check(const ModelSpace& space);

/// log p_t(x_i, y) for all i, NaN where the value is not resolved.
using LogKernel = std::function<std::vector<double>(double t, std::size_t y_index)>;

/// log of the spectral kernel column, NaN below rel_floor * max.
LogKernel spectral_log_kernel(const HeatKernel& kern, double rel_floor = 1e-12);

/// Sample design shared by the kernel-bound and gradient-estimate fits.
struct KernelSampling {
  std::vector<double> times;
  /// Source nodes y; empty selects every `stride`-th node away from walls.
  std::vector<std::size_t> sources;
  std::size_t stride = 8;
  /// Pairs with d(x, y) > max_spread * sqrt(t) are not sampled (0 disables).
  double max_spread = 0.0;
  /// Nodes closer than this to a reflecting wall are neither sources nor targets.
  double wall_margin = 0.0;
};

/// Fits the smallest C1 and the largest C2 for which the upper and lower
/// Gaussian bounds hold on every sampled (t, x, y). Reported in constants
/// "C1" and "C2"; passes when both are finite and positive.
CheckReport kernel_gaussian_bounds(const ModelSpace& space, const HeatKernel& kern, double m,
                                   double K, double eps, const KernelSampling& sampling);

/// C* = max |d/dx log p_t(x, y)| / (d/t + 1/sqrt t), reported as constants["C"].
CheckReport log_kernel_gradient(const ModelSpace& space, const LogKernel& log_p,
                                const KernelSampling& sampling);

/// C2* = max |d^2/dx^2 log p_t(x, y)| / (d/t + 1/sqrt t)^2, constants["C2"];
/// also reports the first-order constant as constants["C1"].
CheckReport log_kernel_gradient_N2(const ModelSpace& space, const LogKernel& log_p,
                                   const KernelSampling& sampling);

/// Fits the smallest C in |grad log u|^2 <= C (1/t + K)(1 + log(A/u)).
/// Informational; constants["C"].
CheckReport harnack_drift_form(const ModelSpace& space, const HeatSolution& sol, double K);

/// Combines per-level reports of a fitted constant: margin = max_drift minus
/// the relative change between the two finest levels.
CheckReport refinement_stability(const std::string& name, std::span<const CheckReport> levels,
                                 const std::string& constant, double max_drift);

}  // namespace wlab
