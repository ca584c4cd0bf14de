#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wlab/geometry.hpp"
#include "wlab/heat_flow.hpp"
#include "wlab/witten_operator.hpp"

namespace wlab {

/// H(u) = -sum_i mass_i u_i log u_i. Requires u > 0.
double boltzmann_entropy(const ModelSpace& space, std::span<const double> u);

/// Nodal Fisher information sum_i mass_i u_i |(log u)'_i|^2 with central
/// differences; an independent route to dH/dt.
double fisher_information(const ModelSpace& space, std::span<const double> u);

struct EntropyDerivatives {
  /// -int Lu log u dmu.
  double dH = 0.0;
  /// -int (|Lu|^2/u - <grad Lu, grad u/u>) dmu, staggered-gradient form.
  double d2H_flux = 0.0;
  /// -2 int (|Hess log u|^2 + Ric(L)(grad log u, grad log u)) u dmu, nodal form.
  double d2H_bochner = 0.0;
};

EntropyDerivatives entropy_derivatives(const ModelSpace& space, const DiscreteOperator& op,
                                       std::span<const double> u);

/// W_m(u, t) = int (t|f'|^2 + f - m) u dmu with u = e^{-f}/(4 pi t)^{m/2}.
double w_entropy(const ModelSpace& space, std::span<const double> u, double t, double m);

/// W_m through H_m + t dH_m/dt.
double w_entropy_via_hm(const ModelSpace& space, const DiscreteOperator& op,
                        std::span<const double> u, double t, double m);

/// Right-hand side of the W-entropy dissipation identity, split by term.
struct Dissipation {
  double fd = 0.0;          // centered difference of w_entropy in t
  double hessian = 0.0;     // -2t int |Hess f - g/2t|^2 u
  double curvature = 0.0;   // -2t int Ric_{m,n}(L)(f', f') u
  double mn = 0.0;          // -(2/(m-n)) t int (phi' f' + (m-n)/2t)^2 u
  double total() const { return hessian + curvature + mn; }
};

/// The three dissipation terms evaluated on a density slice u at time t.
Dissipation dissipation_terms(const ModelSpace& space, std::span<const double> u, double t,
                              double m);

/// Dissipation terms plus a finite-difference dW/dt on the kernel slice
/// p_t(., y) using the geometric stencil t/rho, t, t*rho.
Dissipation w_dissipation(const ModelSpace& space, const HeatKernel& kern, std::size_t y_index,
                          double t, double m, double rho = 1.0 + 1e-3);

/// Kernel slice p_t(., y) with spectral round-off below rel_floor * max
/// replaced by that floor, so log u stays meaningful in the far tails.
std::vector<double> positive_slice(std::span<const double> p, double rel_floor = 1e-15);

struct EntropyRow {
  double t = 0.0;
  double H = 0.0;
  double dH = 0.0;
  double fisher = 0.0;
  double d2H_flux = 0.0;
  double d2H_bochner = 0.0;
  double Hm = 0.0;
  double dHm = 0.0;
  double d2Hm = 0.0;
  double W_direct = 0.0;
  double W_eq37 = 0.0;
  double dW_fd = 0.0;
  double dW_eq38 = 0.0;
  double term_hessian = 0.0;
  double term_curvature = 0.0;
  double term_mn = 0.0;
  double boundary_mass = 0.0;

  double dW_rhs() const { return term_hessian + term_curvature + term_mn; }
  double residual_w() const { return W_direct - W_eq37; }
  double residual_d2H() const { return d2H_flux - d2H_bochner; }
  double residual_dW() const { return dW_fd - dW_rhs(); }
  /// d2H_m - d2H - m/(2 t^2), zero up to round-off.
  double residual_hm(double m) const;
};

struct EntropyTrace {
  double m = 1.0;
  std::vector<EntropyRow> rows;

  /// One row per t with named columns, including the cross-identity residuals.
  void write_csv(const std::string& path) const;
  /// Largest W(t_{j+1}) - W(t_j), positive when monotonicity is violated.
  double max_w_increase() const;
};

/// t_j = t0 * rho^j, j = 0..count-1.
std::vector<double> geometric_times(double t0, double rho, std::size_t count);

/// Evaluates every entropy quantity on p_t(., y) for each t in `times`.
EntropyTrace h_m_trace(const ModelSpace& space, const DiscreteOperator& op, const HeatKernel& kern,
                       std::size_t y_index, double m, std::span<const double> times);

}  // namespace wlab
