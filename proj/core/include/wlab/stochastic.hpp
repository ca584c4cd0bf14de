#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wlab/check_report.hpp"
#include "wlab/geometry.hpp"
#include "wlab/heat_flow.hpp"

namespace wlab {

struct SimulationOptions {
  double T = 1.0;
  double dt = 1e-3;
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
  /// Keep every k-th step (the initial state is always kept).
  std::size_t record_every = 1;
  /// Stop recording after this time; <= 0 records the whole horizon.
  double record_until = 0.0;
  /// Each increment is the normalized sum of this many consecutive draws, so
  /// a run with coarsening c and step c*dt shares its Brownian path with the
  /// run at step dt and coarsening 1.
  unsigned coarsening = 1;
};

/// Euler-Maruyama paths of the L-diffusion dX = drift dt + sqrt(2) dW.
struct DiffusionEnsemble {
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  double dt = 0.0;
  double x0 = 0.0;
  bool periodic = false;
  bool bridge = false;
  double target = 0.0;
  double horizon = 0.0;
  /// Bridges stop integrating here and are snapped to the target at horizon.
  double stop_time = 0.0;
  std::vector<double> times;
  /// Row-major [path][time] positions, folded into the domain.
  std::vector<double> X;
  /// Unwrapped displacement X_T - x0 on the circle (empty otherwise).
  std::vector<double> unwrapped;

  std::size_t time_count() const { return times.size(); }
  double at(std::size_t path, std::size_t j) const { return X[path * times.size() + j]; }
  /// Index of the recorded time closest to t.
  std::size_t time_index(double t) const;

  /// Header: uint64 path_count, uint64 time_count, double dt; body: row-major
  /// float64 positions. Little-endian throughout.
  void write_binary(const std::string& path) const;
  static DiffusionEnsemble read_binary(const std::string& path);
  /// t, mean, variance per recorded time.
  void write_moments_csv(const std::string& path) const;
};

/// Unconditioned L-diffusion started at x0. Requires paths >= 1000 and a step
/// small enough that one drift or noise increment stays below a tenth of the
/// domain length.
DiffusionEnsemble simulate(const ModelSpace& space, double x0, const SimulationOptions& opt);

/// Doob h-transformed bridge to node y_index at time opt.T, drift augmented
/// by 2 d/dx log p_{T-t}(., y). Integration stops at T - 10 dt and the final
/// position is snapped to y. Where the kernel is below rel_floor * max the
/// local Gaussian gradient (y - x)/(2(T-t)) is used instead.
DiffusionEnsemble simulate_bridge(const ModelSpace& space, const HeatKernel& kern, double x0,
                                  std::size_t y_index, const SimulationOptions& opt,
                                  double rel_floor = 1e-12);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  double halfwidth() const { return 1.96 * se; }
};

/// Sample mean and standard error with fixed-order pairwise summation.
McEstimate mc_mean(const std::vector<double>& samples);

/// Grid field of d/dx log p_s(., y) and log p_s(., y); NaN where unresolved.
struct LogKernelSlice {
  std::vector<double> logp, grad, hess;
  double s = 0.0;
};
LogKernelSlice log_kernel_slice(const ModelSpace& space, const HeatKernel& kern, double s,
                                std::size_t y_index, double rel_floor = 1e-12);

/// Linear interpolation of a grid field at x; NaN when either cell end is NaN.
double interpolate_field(const ModelSpace& space, const std::vector<double>& f, double x);

/// Empirical law of X_T against p_T(x0, .) dmu on bins of equal kernel
/// probability. margin = -L1 distance, tolerance `tol`.
CheckReport law_vs_kernel(const ModelSpace& space, const HeatKernel& kern, std::size_t x0_index,
                          const DiffusionEnsemble& ens, std::size_t bins = 16, double tol = 0.05);

/// s -> E[h(X_s, T - s)] with h = psi(t)|u'|^2/u - u log(A/u) must be
/// non-decreasing within the 95% band of each paired increment, and
/// E[h(X_T, 0)] >= h(x0, T) - band. `sol` must store the times T - s for
/// every recorded s.
CheckReport supermartingale_h(const ModelSpace& space, const HeatSolution& sol, double K,
                              const DiffusionEnsemble& ens);

/// E[J(T/2, X_{T/2})] - J(0, x0) = E[int_0^{T/2} |J'|^2 dt] with
/// J(t, .) = log p_{T-t}(., y). Margin is minus the relative gap; the 95%
/// band is widened by the dt bias measured against `coarse` when given.
CheckReport bridge_energy_identity(const ModelSpace& space, const HeatKernel& kern,
                                   std::size_t y_index, const DiffusionEnsemble& ens,
                                   const DiffusionEnsemble* coarse = nullptr,
                                   double rel_tol = 0.05);

/// d/dt E[|J'(t, X_t)|^2] = 2 E[(J'')^2 + Ric(L) (J')^2] at interior t; LHS by
/// a centered difference over +-delta.
CheckReport gradient_energy_derivative(const ModelSpace& space, const HeatKernel& kern,
                                       std::size_t y_index, const DiffusionEnsemble& ens,
                                       double t, double delta, double fd_tol = 1e-2);

/// |d/dx log p_T(x0, y)|^2 <= 2(1/T + K) E[log(p_{T/2}(X_{T/2}, y)/p_T(x0, y))].
CheckReport harnack_via_bridge(const ModelSpace& space, const HeatKernel& kern,
                               std::size_t x0_index, std::size_t y_index,
                               const DiffusionEnsemble& ens, double K, double grid_tol = 1e-3);

/// Bridge expectation of F(X_t) from unconditioned paths reweighted by
/// p_{T-t}(X_t, y)/p_T(x0, y).
McEstimate girsanov_bridge_mean(const ModelSpace& space, const HeatKernel& kern,
                                std::size_t x0_index, std::size_t y_index, double T,
                                const DiffusionEnsemble& unconditioned, double t,
                                const std::function<double(double)>& F);

}  // namespace wlab
