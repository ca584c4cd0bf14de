#include "wlab/harnack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wlab {

double harnack_coefficient(double K, double t) {
  const double a = 2.0 * K * t;
  if (a < 1e-300) return 1.0 / t;
  return 2.0 * K / -std::expm1(-a);
}

double hamilton_coefficient(double K, double t) { return 1.0 / t + 2.0 * K; }

double harnack_psi(double K, double t) {
  const double a = 2.0 * K * t;
  if (a < 1e-300) return t;
  return -std::expm1(-a) / (2.0 * K);
}

double x_over_sinh(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-4) return 1.0 - ax * ax / 6.0;
  if (ax > 700.0) return 2.0 * ax * std::exp(-ax);
  return ax / std::sinh(ax);
}

double lambda_km(double K, double m) { return (m - 1.0) * (m - 1.0) * K / 8.0; }

namespace {

using Coefficient = double (*)(double K, double t);

double relative_boundary_mass(const ModelSpace& space, std::span<const double> u) {
  double total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) total += space.mass(i) * u[i];
  return total > 0.0 ? space.boundary_mass(u) / total : 0.0;
}

// True when u_i or a stencil neighbour falls below the underflow clamp.
bool underflowed(const ModelSpace& space, std::span<const double> u, std::size_t i, double A) {
  const std::size_t N = u.size();
  const double floor = kUnderflowClamp * A;
  if (u[i] < floor) return true;
  if (space.periodic()) return u[(i + 1) % N] < floor || u[(i + N - 1) % N] < floor;
  if (i > 0 && u[i - 1] < floor) return true;
  if (i + 1 < N && u[i + 1] < floor) return true;
  return false;
}

CheckReport harnack_sweep(const std::string& name, const ModelSpace& space,
                          const HeatSolution& sol, double K, double tol, Coefficient coef) {
  CheckReport r;
  r.name = name;
  r.tolerance = tol;
  r.constants["K"] = K;
  const double A = sol.sup();
  r.constants["A"] = A;
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    const double t = sol.times[k];
    if (!(t > 0.0)) continue;
    const auto& u = sol.states[k];
    r.boundary_mass = std::max(r.boundary_mass, relative_boundary_mass(space, u));
    const auto g = gradient(space, clamped_log(u));
    const double c = coef(K, t);
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (underflowed(space, u, i, A)) {
        ++r.excluded;
        continue;
      }
      const double lhs = g[i] * g[i];
      const double rhs = c * std::log(A / u[i]);
      r.consider(rhs - lhs, {t, space.x(i), std::numeric_limits<double>::quiet_NaN(), lhs, rhs});
    }
  }
  r.decide();
  return r;
}

}  // namespace

CheckReport harnack_improved(const ModelSpace& space, const HeatSolution& sol, double K,
                             double tol) {
  return harnack_sweep("harnack_improved", space, sol, K, tol, harnack_coefficient);
}

double coefficient_dominance_margin(double K, std::span<const double> t_grid) {
  double worst = std::numeric_limits<double>::infinity();
  for (double t : t_grid) worst = std::min(worst, hamilton_coefficient(K, t) - harnack_coefficient(K, t));
  return worst;
}

CheckReport harnack_hamilton(const ModelSpace& space, const HeatSolution& sol, double K,
                             double tol) {
  CheckReport r = harnack_sweep("harnack_hamilton", space, sol, K, tol, hamilton_coefficient);
  std::vector<double> grid;
  for (double t : sol.times)
    if (t > 0.0) grid.push_back(t);
  const double dom = coefficient_dominance_margin(K, grid);
  r.constants["dominance_margin"] = dom;
  if (dom < 0.0) {
    r.verdict = Verdict::fail;
    r.note = "coefficient dominance violated";
  }
  return r;
}

CheckReport lsi_semigroup(const ModelSpace& space, const HeatKernel& kern,
                          std::span<const double> f0, double K, std::span<const double> T_grid,
                          double tol) {
  for (double v : f0)
    if (!(v > 0.0)) throw std::invalid_argument("lsi_semigroup: f0 must be positive");
  CheckReport r;
  r.name = "lsi_semigroup";
  r.tolerance = tol;
  r.constants["K"] = K;
  std::vector<double> flogf(f0.size());
  for (std::size_t i = 0; i < f0.size(); ++i) flogf[i] = f0[i] * std::log(f0[i]);
  std::size_t unresolved = 0;
  for (double T : T_grid) {
    const auto Pf = kern.propagate(T, f0);
    const auto Pflogf = kern.propagate(T, flogf);
    const auto g = gradient(space, Pf);
    const double c = harnack_coefficient(K, T);
    r.boundary_mass = std::max(r.boundary_mass, relative_boundary_mass(space, Pf));
    const double floor = 1e-12 * *std::max_element(Pf.begin(), Pf.end());
    for (std::size_t i = 0; i < Pf.size(); ++i) {
      if (!(Pf[i] > floor)) {
        ++unresolved;
        continue;
      }
      const double lhs = g[i] * g[i] / Pf[i];
      const double rhs = c * (Pflogf[i] - Pf[i] * std::log(Pf[i]));
      r.consider(rhs - lhs, {T, space.x(i), std::numeric_limits<double>::quiet_NaN(), lhs, rhs});
    }
  }
  r.constants["unresolved"] = static_cast<double>(unresolved);
  r.decide();
  return r;
}

CheckReport liouville_check(const ModelSpace& space, const DiscreteOperator& op) {
  const HeatKernel kern(op);
  const auto& lambda = kern.eigenvalues();
  const double scale = lambda.maxCoeff();
  std::size_t dim = 0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    if (std::abs(lambda(k)) <= 1e-8 * scale) ++dim;
  double min_ric = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < space.size(); ++i) min_ric = std::min(min_ric, ric_L(space, i));

  CheckReport r;
  r.name = "liouville";
  r.tolerance = 0.0;
  r.evaluated = static_cast<std::size_t>(lambda.size());
  r.margin = dim == 1 ? 0.0 : -std::abs(static_cast<double>(dim) - 1.0);
  r.witness.lhs = static_cast<double>(dim);
  r.witness.rhs = 1.0;
  r.constants["kernel_dim"] = static_cast<double>(dim);
  r.constants["min_ric_L"] = min_ric;
  r.constants["ric_L_nonnegative"] = min_ric >= 0.0 ? 1.0 : 0.0;
  r.decide();
  return r;
}

CheckReport liouville_check(const ModelSpace& space) { return liouville_check(space, assemble(space)); }

LogKernel spectral_log_kernel(const HeatKernel& kern, double rel_floor) {
  return [&kern, rel_floor](double t, std::size_t y) {
    auto p = kern.column(t, y);
    const double pmax = *std::max_element(p.begin(), p.end());
    const double floor = std::max(rel_floor * pmax, kLogFloor);
    for (double& v : p) v = v >= floor ? std::log(v) : std::numeric_limits<double>::quiet_NaN();
    return p;
  };
}

namespace {

bool away_from_walls(const ModelSpace& space, std::size_t i, double margin) {
  if (space.periodic() || margin <= 0.0) return true;
  return space.x(i) - space.lo() >= margin && space.hi() - space.x(i) >= margin;
}

std::vector<std::size_t> sample_sources(const ModelSpace& space, const KernelSampling& s) {
  if (!s.sources.empty()) return s.sources;
  std::vector<std::size_t> out;
  const std::size_t N = space.size();
  const std::size_t skip = space.periodic() ? 0 : kWallSkip;
  for (std::size_t i = skip; i + skip < N; i += std::max<std::size_t>(1, s.stride))
    if (away_from_walls(space, i, s.wall_margin)) out.push_back(i);
  return out;
}

bool sampled_pair(const KernelSampling& s, double d, double t) {
  return s.max_spread <= 0.0 || d <= s.max_spread * std::sqrt(t);
}

bool interior(const ModelSpace& space, std::size_t i, double margin) {
  return space.periodic() || (i >= kWallSkip && i + kWallSkip < space.size() &&
                              away_from_walls(space, i, margin));
}

}  // namespace

CheckReport kernel_gaussian_bounds(const ModelSpace& space, const HeatKernel& kern, double m,
                                   double K, double eps, const KernelSampling& sampling) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("kernel_gaussian_bounds: eps in (0,1)");
  constexpr double alpha = 1.0;
  const double lambda = lambda_km(K, m);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CheckReport r;
  r.name = "kernel_gaussian_bounds";
  r.tolerance = 0.0;
  double C1 = 0.0, C2 = std::numeric_limits<double>::infinity();
  Witness w1, w2;
  std::size_t unresolved = 0;
  for (double t : sampling.times) {
    const double st = std::sqrt(t);
    for (std::size_t y : sample_sources(space, sampling)) {
      const auto p = kern.column(t, y);
      const double pmax = *std::max_element(p.begin(), p.end());
      const double vol = ball_volume(space, space.x(y), st);
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (!away_from_walls(space, i, sampling.wall_margin)) continue;
        const double d = geodesic_distance(space, space.x(i), space.x(y));
        if (!sampled_pair(sampling, d, t)) continue;
        if (p[i] < 1e-12 * pmax) {
          ++unresolved;
          continue;
        }
        ++r.evaluated;
        const double upper = std::exp(-d * d / (4.0 * (1.0 + eps) * t) + alpha * eps * K * t) *
                             std::pow((d + st) / st, 0.5 * m) *
                             std::exp(0.5 * std::sqrt((m - 1.0) * K) * d) / vol;
        const double lower = std::exp(-(1.0 + eps) * lambda * t) / vol *
                             std::exp(-d * d / (4.0 * (1.0 - eps) * t)) *
                             std::pow(x_over_sinh(std::sqrt(K) * d), 0.5 * (m - 1.0));
        const double c1 = p[i] / upper, c2 = p[i] / lower;
        if (c1 > C1) {
          C1 = c1;
          w1 = {t, space.x(i), space.x(y), p[i], upper};
        }
        if (c2 < C2) {
          C2 = c2;
          w2 = {t, space.x(i), space.x(y), p[i], lower};
        }
      }
    }
  }
  r.constants["C1"] = C1;
  r.constants["C2"] = C2;
  r.constants["lambda_Km"] = lambda;
  r.constants["eps"] = eps;
  r.constants["unresolved"] = static_cast<double>(unresolved);
  const bool ok = r.evaluated > 0 && std::isfinite(C1) && C1 > 0.0 && std::isfinite(C2) && C2 > 0.0;
  r.margin = ok ? 0.0 : nan;
  r.witness = w2;
  r.witness.lhs = w1.lhs;
  r.note = ok ? "" : "no resolved samples";
  r.decide();
  return r;
}

namespace {

CheckReport gradient_fit(const std::string& name, const ModelSpace& space, const LogKernel& log_p,
                         const KernelSampling& sampling, bool second_order) {
  CheckReport r;
  r.name = name;
  r.tolerance = 0.0;
  double C1 = 0.0, C2 = 0.0;
  Witness w1, w2;
  std::size_t unresolved = 0;
  for (double t : sampling.times) {
    const double st = std::sqrt(t);
    for (std::size_t y : sample_sources(space, sampling)) {
      const auto lp = log_p(t, y);
      const auto g = gradient(space, lp);
      std::vector<double> H;
      if (second_order) H = hessian(space, lp);
      for (std::size_t i = 0; i < lp.size(); ++i) {
        if (!interior(space, i, sampling.wall_margin)) continue;
        const double d = geodesic_distance(space, space.x(i), space.x(y));
        if (!sampled_pair(sampling, d, t)) continue;
        if (std::isnan(g[i]) || (second_order && std::isnan(H[i]))) {
          ++unresolved;
          continue;
        }
        ++r.evaluated;
        const double scale = d / t + 1.0 / st;
        const double c1 = std::abs(g[i]) / scale;
        if (c1 > C1) {
          C1 = c1;
          w1 = {t, space.x(i), space.x(y), std::abs(g[i]), scale};
        }
        if (second_order) {
          const double c2 = std::abs(H[i]) / (scale * scale);
          if (c2 > C2) {
            C2 = c2;
            w2 = {t, space.x(i), space.x(y), std::abs(H[i]), scale * scale};
          }
        }
      }
    }
  }
  r.constants["C1"] = C1;
  r.constants["unresolved"] = static_cast<double>(unresolved);
  if (second_order) {
    r.constants["C2"] = C2;
    r.witness = w2;
  } else {
    r.constants["C"] = C1;
    r.witness = w1;
  }
  r.margin = r.evaluated > 0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  r.decide();
  return r;
}

}  // namespace

CheckReport log_kernel_gradient(const ModelSpace& space, const LogKernel& log_p,
                                const KernelSampling& sampling) {
  return gradient_fit("log_kernel_gradient", space, log_p, sampling, false);
}

CheckReport log_kernel_gradient_N2(const ModelSpace& space, const LogKernel& log_p,
                                   const KernelSampling& sampling) {
  return gradient_fit("log_kernel_gradient_N2", space, log_p, sampling, true);
}

CheckReport harnack_drift_form(const ModelSpace& space, const HeatSolution& sol, double K) {
  CheckReport r;
  r.name = "harnack_drift_form";
  r.informational = true;
  r.tolerance = 0.0;
  const double A = sol.sup();
  double C = 0.0;
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    const double t = sol.times[k];
    if (!(t > 0.0)) continue;
    const auto& u = sol.states[k];
    const auto g = gradient(space, clamped_log(u));
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (underflowed(space, u, i, A)) {
        ++r.excluded;
        continue;
      }
      ++r.evaluated;
      const double rhs = (1.0 / t + K) * (1.0 + std::log(A / u[i]));
      const double c = g[i] * g[i] / rhs;
      if (c > C) {
        C = c;
        r.witness = {t, space.x(i), std::numeric_limits<double>::quiet_NaN(), g[i] * g[i], rhs};
      }
    }
  }
  r.constants["C"] = C;
  r.margin = 0.0;
  r.decide();
  return r;
}

CheckReport refinement_stability(const std::string& name, std::span<const CheckReport> levels,
                                 const std::string& constant, double max_drift) {
  CheckReport r;
  r.name = name;
  r.tolerance = 0.0;
  if (levels.empty()) {
    r.note = "no levels";
    r.margin = std::numeric_limits<double>::quiet_NaN();
    r.verdict = Verdict::inconclusive;
    return r;
  }
  for (const auto& l : levels) {
    const auto it = l.constants.find(constant);
    r.refinement.push_back(it == l.constants.end() ? std::numeric_limits<double>::quiet_NaN()
                                                   : it->second);
    r.boundary_mass = std::max(r.boundary_mass, l.boundary_mass);
  }
  const CheckReport& finest = levels.back();
  r.constants = finest.constants;
  r.witness = finest.witness;
  r.evaluated = finest.evaluated;
  r.excluded = finest.excluded;
  r.informational = finest.informational;
  if (levels.size() < 2) {
    r.note = "refinement needs two levels";
    r.margin = std::numeric_limits<double>::quiet_NaN();
    r.verdict = Verdict::inconclusive;
    return r;
  }
  const double fine = r.refinement.back();
  const double coarse = r.refinement[r.refinement.size() - 2];
  const double drift = fine == coarse ? 0.0 : std::abs(fine - coarse) / std::abs(fine);
  r.constants["drift"] = drift;
  r.margin = max_drift - drift;
  r.decide();
  if (finest.verdict != Verdict::pass && r.verdict == Verdict::pass) r.verdict = finest.verdict;
  return r;
}

}  // namespace wlab
