#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wlab/check_report.hpp"

namespace wlab {

/// Raised when a space or config violates a structural precondition. `field`
/// names the offending parameter so front ends can point at it.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class SpaceKind {
  circle,     // periodic, nodes x_i = origin + i*h, h = length/N
  interval,   // reflecting walls at both ends, nodes include the endpoints
  line,       // truncated real line; reflecting walls, localization enforced
  radial,     // radial reduction of a rotationally symmetric n-manifold
};

const char* kind_name(SpaceKind kind);
SpaceKind parse_kind(const std::string& name);

struct PotentialSpec {
  enum class Form { constant, quadratic, cosine, tabulated };
  Form form = Form::constant;
  /// Additive constant c (all symbolic forms).
  double offset = 0.0;
  /// a in a*x^2/2, or amplitude eps in eps*cos(k*x).
  double scale = 1.0;
  /// k in eps*cos(k*x); <= 0 selects 2*pi/length.
  double frequency = 0.0;
  /// (x, phi) samples for the tabulated form, sorted by x.
  std::vector<std::pair<double, double>> table;

  static PotentialSpec constant(double c) { return {Form::constant, c, 0.0, 0.0, {}}; }
  static PotentialSpec quadratic(double a = 1.0, double c = 0.0) {
    return {Form::quadratic, c, a, 0.0, {}};
  }
  static PotentialSpec cosine(double eps, double k = 0.0) {
    return {Form::cosine, 0.0, eps, k, {}};
  }
};

/// Reads a two-column CSV (x, phi). A header row is skipped if non-numeric.
PotentialSpec load_potential_csv(const std::string& path);

/// Warp profile f(r) of dr^2 + f(r)^2 g_sphere for radial reductions.
enum class Warp { flat, sphere, hyperbolic };

const char* warp_name(Warp w);
Warp parse_warp(const std::string& name);

inline constexpr double kInfiniteDimension = std::numeric_limits<double>::infinity();

struct SpaceSpec {
  SpaceKind kind = SpaceKind::circle;
  std::size_t nodes = 256;
  double length = 6.283185307179586;
  double origin = 0.0;
  PotentialSpec potential;
  Warp warp = Warp::flat;
  /// Bakry-Emery dimension parameter; kInfiniteDimension selects Ric(L).
  double m = 1.0;
  /// Topological dimension represented (radial reductions use n >= 2).
  int n = 1;
};

/// Weighted 1-D model geometry. Immutable after construction.
///
/// Node weights w_i = J(x_i) exp(-phi(x_i)) define the measure; quadrature
/// masses are w_i * h on the circle and trapezoid masses (halved at the two
/// endpoint nodes) on reflecting spaces. The curvature bound K is computed
/// from the nodal data, never taken from input.
class ModelSpace {
 public:
  static ModelSpace build(const SpaceSpec& spec);

  const SpaceSpec& spec() const { return spec_; }
  SpaceKind kind() const { return spec_.kind; }
  bool periodic() const { return spec_.kind == SpaceKind::circle; }
  std::size_t size() const { return x_.size(); }
  double h() const { return h_; }
  double length() const { return spec_.length; }
  double lo() const { return spec_.origin; }
  double hi() const { return spec_.origin + spec_.length; }
  double m() const { return spec_.m; }
  int n() const { return spec_.n; }

  /// max(0, -min_i Ric_{m,n}(L)(x_i)).
  double K() const { return K_; }
  /// max(0, -min_i Ric(L)(x_i)); the bound the Harnack inequalities need.
  double K_L() const { return K_L_; }

  double x(std::size_t i) const { return x_[i]; }
  std::span<const double> nodes() const { return x_; }
  double phi(std::size_t i) const { return phi_[i]; }
  double dphi(std::size_t i) const { return dphi_[i]; }
  double d2phi(std::size_t i) const { return d2phi_[i]; }
  double density(std::size_t i) const { return J_[i]; }
  /// (log J)'(x_i); zero on flat 1-D spaces.
  double dlog_density(std::size_t i) const { return dlogJ_[i]; }
  double ric_radial(std::size_t i) const { return ric_[i]; }
  double weight(std::size_t i) const { return w_[i]; }
  std::span<const double> weights() const { return w_; }
  double mass(std::size_t i) const { return mass_[i]; }
  std::span<const double> masses() const { return mass_; }
  double total_mass() const { return total_mass_; }

  /// Whether phi is constant to machine precision.
  bool phi_constant() const { return phi_constant_; }

  /// Drift (log w)'(x) = (log J)'(x) - phi'(x) at an arbitrary point; the
  /// L-diffusion has generator d^2/dx^2 + drift * d/dx.
  double drift(double x) const;
  /// phi''(x) + Ric(x) at an arbitrary point (linear interpolation between nodes).
  double ric_L_at(double x) const;

  /// Maps a coordinate back into the domain (wrap on the circle, mirror at walls).
  double fold(double x) const;

  /// Mass of sum_i mass_i*u_i carried by nodes within 3h of a reflecting wall.
  double boundary_mass(std::span<const double> u) const;

  /// Integral of the piecewise-linear density from lo() to x (periodic
  /// extension on the circle).
  double cumulative_measure(double x) const;

  /// Linear interpolation of nodal samples at x (wrap or clamp as appropriate).
  double interpolate(std::span<const double> f, double x) const;

 private:
  ModelSpace() = default;

  SpaceSpec spec_;
  double h_ = 0.0;
  double K_ = 0.0;
  double K_L_ = 0.0;
  double total_mass_ = 0.0;
  bool phi_constant_ = true;
  std::vector<double> x_, phi_, dphi_, d2phi_, J_, dlogJ_, ric_, w_, mass_;
  std::vector<double> prefix_;  // cumulative measure at nodes
};

/// Ric(L) = Ric + phi'' at node i.
double ric_L(const ModelSpace& space, std::size_t i);

/// Ric_{m,n}(L) = Ric + phi'' - phi'^2/(m - n) at node i, using the space's m.
double ric_mn(const ModelSpace& space, std::size_t i);
/// Same with an explicit m (kInfiniteDimension allowed).
double ric_mn(const ModelSpace& space, std::size_t i, double m);

/// Surface measure of the unit (d)-sphere, Gamma-continued to real d >= 0.
double sphere_area(double d);

/// Volume of the radius-r ball in the m-dimensional space form of sectional
/// curvature -K/(m-1).
double comparison_volume(double m, double K, double r);

struct ComparisonVolume {
  double m = 1.0;
  double K = 0.0;
  double r = 0.0;
  double value() const { return comparison_volume(m, K, r); }
};

/// mu(B(center, r)) with the density interpolated linearly between nodes.
double ball_volume(const ModelSpace& space, double center, double r);

double geodesic_distance(const ModelSpace& space, double x, double y);

/// Signed displacement y - x along the shortest path (circle aware).
double displacement(const ModelSpace& space, double x, double y);

/// Bishop-Gromov doubling check:
///   mu(B_y(sqrt t)) / mu(B_y(sqrt(t/2))) <= 2^{m/2} exp(sqrt((m-1)K) t).
/// Inconclusive when the larger ball leaves a truncated domain.
CheckReport bishop_gromov_ratio_check(const ModelSpace& space, double m, double K,
                                      double t, double y, double tol = 1e-12);

/// Relative volume comparison on all node pairs (stride-subsampled):
///   mu(B_y(sqrt t))/mu(B_x(sqrt t)) <= ((d+sqrt t)/sqrt t)^m exp(sqrt((m-1)K) d).
CheckReport relative_volume_check(const ModelSpace& space, double m, double K, double t,
                                  std::size_t stride = 1, double tol = 1e-12);

/// inf over sampled centers of mu(B(x, r0)); reported for the uniform volume
/// lower bound condition, never used in a computation.
double uniform_volume_floor(const ModelSpace& space, double r0, std::size_t stride = 1);

}  // namespace wlab
