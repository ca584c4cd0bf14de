#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wlab/check_report.hpp"
#include "wlab/geometry.hpp"
#include "wlab/witten_operator.hpp"

namespace wlab {

/// 4 tau D(v, v) - int v^2 log v^2 dmu - (m + (m/2) log(4 pi tau)) without the
/// normalization check; the smooth extension the optimizer differentiates.
double w_functional(const DiscreteOperator& op, std::span<const double> v, double tau, double m);

/// Exact gradient of w_functional with respect to the nodal values of v.
std::vector<double> w_gradient(const DiscreteOperator& op, std::span<const double> v, double tau,
                               double m);

/// W_m(v^2, tau) for sum_i mass_i v_i^2 = 1 (to 1e-8); throws otherwise.
double w_of_v(const DiscreteOperator& op, std::span<const double> v, double tau, double m);

/// sqrt(sum mass_i v_i^2).
double l2_norm(const DiscreteOperator& op, std::span<const double> v);
std::vector<double> normalized(const DiscreteOperator& op, std::span<const double> v);

struct MuOptions {
  double tol = 1e-6;
  std::size_t max_iterations = 50000;
};

struct RestartResult {
  std::string start;
  double value = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double boundary_mass = 0.0;
  /// Rejected when the minimizer is not localized away from reflecting walls.
  bool accepted = true;
};

struct MuEstimate {
  double tau = 0.0;
  double m = 1.0;
  double mu = 0.0;
  /// u* = v*^2 on the grid.
  std::vector<double> minimizer;
  std::size_t iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  /// max - min of the accepted restart values.
  double spread = 0.0;
  std::vector<RestartResult> restarts;

  std::string to_json() const;
  void write_minimizer_csv(const std::string& path, const ModelSpace& space) const;
};

/// Starting points: uniform, a centred Gaussian bump of width length/12 and
/// an asymmetric two-bump profile; the first `restarts` of them are used.
std::vector<std::vector<double>> default_starts(const ModelSpace& space, const DiscreteOperator& op,
                                                std::size_t restarts = 3);

/// Riemannian gradient descent on the unit sphere of L^2(mu) with a
/// Barzilai-Borwein trial step and Armijo backtracking. The estimate is the
/// best accepted restart.
MuEstimate minimize_mu(const ModelSpace& space, const DiscreteOperator& op, double tau, double m,
                       std::size_t restarts = 3, const MuOptions& opt = {});

/// W(v) - mu(tau) for every trial v (each normalized first). Margin is the
/// smallest value; the inequality holds when it is >= -tol.
CheckReport lsi_check(const ModelSpace& space, const DiscreteOperator& op,
                      std::span<const std::vector<double>> trials, double tau, double m,
                      const MuEstimate& mu, double tol = 1e-6);

/// Trial battery disjoint from the optimizer starts: narrow and wide bumps,
/// an off-centre bump, a cosine-modulated profile and a sharp spike.
std::vector<std::vector<double>> trial_battery(const ModelSpace& space, const DiscreteOperator& op);

/// mu(tau) over a tau grid. Passes when every estimate is finite; the
/// smallest value is reported as constants["lower_bound"] and each mu is
/// compared with W of a Gaussian trial of variance 2 tau.
CheckReport mu_lower_bound_scan(const ModelSpace& space, const DiscreteOperator& op, double m,
                                std::span<const double> tau_grid,
                                std::vector<MuEstimate>* estimates = nullptr,
                                const MuOptions& opt = {});

/// Largest mismatch between <grad W, d> and a centred difference of
/// w_functional over `directions` pseudo-random multiplicative directions
/// d_i = xi_i v_i, relative to ||grad W||_* ||d||. Multiplicative directions
/// keep the perturbation inside the smooth region of v^2 log v^2.
double w_gradient_fd_error(const DiscreteOperator& op, std::span<const double> v, double tau,
                           double m, std::size_t directions = 8, std::uint64_t seed = 11);

/// ||u* - G||_{L^2(mu)} with G the Gaussian of variance 2 tau centred at the
/// mean of u*, normalized on the grid.
double gaussian_l2_distance(const ModelSpace& space, std::span<const double> u, double tau);

}  // namespace wlab
