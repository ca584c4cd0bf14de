#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "wlab/geometry.hpp"

namespace wlab {

/// Tridiagonal (cyclic on the circle) discretization of L = d^2 - phi' d in
/// divergence form. Row i reads
///
///   (Lu)_i = lower_i u_{i-1} + diag_i u_i + upper_i u_{i+1}
///
/// and mass_i (Lu)_i = sum over adjacent faces f of (w_f / h)(u_nbr - u_i),
/// which makes L symmetric in the mass-weighted inner product and gives the
/// exact discrete integration-by-parts identity.
class DiscreteOperator {
 public:
  DiscreteOperator(bool periodic, double h, std::vector<double> masses,
                   std::vector<double> face_weights);

  std::size_t size() const { return diag_.size(); }
  bool periodic() const { return periodic_; }
  double h() const { return h_; }
  std::size_t face_count() const { return face_w_.size(); }

  std::span<const double> lower() const { return lower_; }
  std::span<const double> diag() const { return diag_; }
  std::span<const double> upper() const { return upper_; }
  std::span<const double> masses() const { return mass_; }
  /// w_{f+1/2} for face f between nodes f and f+1 (mod N on the circle).
  std::span<const double> face_weights() const { return face_w_; }

  void apply(std::span<const double> u, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> u) const;

  /// L_{ij} as a dense matrix.
  Eigen::MatrixXd dense() const;
  Eigen::SparseMatrix<double> sparse() const;

  /// Copy with the listed faces removed (zero conductance). Used to build
  /// synthetic disconnected fixtures.
  DiscreteOperator with_cut_faces(std::span<const std::size_t> faces) const;

  /// JSON object with bands, masses and face weights.
  std::string to_json() const;

 private:
  void rebuild_bands();

  bool periodic_;
  double h_;
  std::vector<double> mass_, face_w_;
  std::vector<double> lower_, diag_, upper_;
};

/// Assembles L with geometric-mean face weights w_{i+1/2} = sqrt(w_i w_{i+1}).
DiscreteOperator assemble(const ModelSpace& space);

/// Staggered gradient (u_{f+1} - u_f)/h on each face.
std::vector<double> face_gradient(const DiscreteOperator& op, std::span<const double> u);

/// Discrete Dirichlet form sum_f w_f h (grad u)_f (grad v)_f.
double dirichlet_form(const DiscreteOperator& op, std::span<const double> u,
                      std::span<const double> v);

/// |Dirichlet form(u, v) + sum_i mass_i (Lu)_i v_i|; zero up to roundoff.
double ibp_defect(const DiscreteOperator& op, std::span<const double> u,
                  std::span<const double> v);

/// Node-centered first derivative: central in the interior and on the
/// circle, one-sided second order at reflecting walls.
std::vector<double> gradient(const ModelSpace& space, std::span<const double> u);
/// Node-centered second derivative, same stencil conventions as gradient().
std::vector<double> hessian(const ModelSpace& space, std::span<const double> u);

/// Number of nodes next to each reflecting wall where pointwise diagnostics
/// built from L and nodal derivatives are not meaningful.
inline constexpr std::size_t kWallSkip = 2;

/// Pointwise residual of the Bakry-Emery Bochner identity
///   L|u'|^2 - 2 u' (Lu)' - 2 (u'')^2 - 2 Ric(L) u'^2,
/// zero on the kWallSkip nodes next to reflecting walls.
std::vector<double> bochner_defect(const ModelSpace& space, const DiscreteOperator& op,
                                   std::span<const double> u);

/// Max |v_i| over nodes at least kWallSkip away from reflecting walls.
double max_interior_abs(const ModelSpace& space, std::span<const double> v);

}  // namespace wlab
