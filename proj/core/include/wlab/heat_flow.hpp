#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wlab/geometry.hpp"
#include "wlab/witten_operator.hpp"

namespace wlab {

/// Snapshots u(t_j, .) of a Crank-Nicolson run.
struct HeatSolution {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  double initial_mass = 0.0;
  double dt = 0.0;

  /// sup over every stored (t, x), including t = 0.
  double sup() const;
};

/// Default step factor*h^2/2, capped so that I + dt/2 L stays entrywise
/// non-negative (which keeps Crank-Nicolson positivity preserving).
double default_time_step(const DiscreteOperator& op, double factor = 1.0);

double total_mass(const DiscreteOperator& op, std::span<const double> u);

/// Crank-Nicolson: (I - dt/2 L) u^{j+1} = (I + dt/2 L) u^j with a sparse LU
/// factorization reused across steps. dt is shrunk so that a whole number of
/// steps reaches t_end; the step used is HeatSolution::dt. Stores every
/// `store_every`-th step plus the final state.
HeatSolution solve(const DiscreteOperator& op, std::span<const double> u0, double t_end,
                   double dt, std::size_t store_every = 1);

/// Spectral heat kernel p_t(x_i, x_j) with respect to the discrete measure.
class HeatKernel {
 public:
  explicit HeatKernel(const DiscreteOperator& op);

  std::size_t size() const { return masses_.size(); }
  const Eigen::VectorXd& eigenvalues() const { return lambda_; }
  /// Columns e_k, orthonormal in sum_i mass_i e_k(i) e_l(i).
  const Eigen::MatrixXd& eigenvectors() const { return modes_; }
  std::span<const double> masses() const { return masses_; }

  double operator()(double t, std::size_t i, std::size_t j) const;
  /// Full matrix [p_t(x_i, x_j)].
  Eigen::MatrixXd matrix(double t) const;
  /// p_t(., x_j).
  std::vector<double> column(double t, std::size_t j) const;
  /// d/dt p_t(., x_j).
  std::vector<double> time_derivative_column(double t, std::size_t j) const;
  /// (P_t f)(x_i) = sum_j p_t(x_i, x_j) f_j mass_j.
  std::vector<double> propagate(double t, std::span<const double> f) const;

 private:
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd modes_;
  std::vector<double> masses_;
};

/// Dense symmetric eigendecomposition of M^{1/2}(-L)M^{-1/2}.
HeatKernel kernel(const DiscreteOperator& op);

/// Kernel values below this are treated as underflow.
inline constexpr double kLogFloor = 1e-300;

/// log(max(p, kLogFloor)).
std::vector<double> clamped_log(std::span<const double> p);

struct HamiltonJacobiDefect {
  double max_defect = 0.0;
  double t_at = 0.0;
  double x_at = 0.0;
  std::size_t samples = 0;
  std::size_t excluded = 0;
};

/// Supplies J(t, .) and dJ/dt(t, .) on the grid.
using LogKernelField = std::function<void(double t, std::vector<double>& J,
                                          std::vector<double>& dJdt)>;

/// max |dJ/dt + LJ + |grad J|^2| over interior nodes and the given times.
/// A node whose stencil touches a NaN entry of J is counted as excluded.
HamiltonJacobiDefect hamilton_jacobi_defect(const ModelSpace& space, const DiscreteOperator& op,
                                            const LogKernelField& field,
                                            std::span<const double> times);

/// J(t, .) = log p_{T-t}(., y_j) from the spectral kernel. Times with
/// T - t < 10*dt are skipped; so are nodes where p < rel_floor * max p.
HamiltonJacobiDefect hamilton_jacobi_defect(const ModelSpace& space, const DiscreteOperator& op,
                                            const HeatKernel& kern, double T, std::size_t y_index,
                                            std::span<const double> times, double dt,
                                            double rel_floor = 1e-12);

/// Writes p_t as a CSV matrix: header row of y coordinates, one row per x.
void write_kernel_csv(const std::string& path, const ModelSpace& space, const HeatKernel& kern,
                      double t);

}  // namespace wlab
