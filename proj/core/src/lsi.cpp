#include "wlab/lsi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "wlab/rng.hpp"

namespace wlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double inner(const DiscreteOperator& op, std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += op.masses()[i] * a[i] * b[i];
  return acc;
}

double entropy_term(double v) {
  const double s = v * v;
  return s > 0.0 ? s * std::log(s) : 0.0;
}

double constant_term(double tau, double m) {
  return m + 0.5 * m * std::log(4.0 * std::numbers::pi * tau);
}

}  // namespace

double w_functional(const DiscreteOperator& op, std::span<const double> v, double tau, double m) {
  double ent = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) ent += op.masses()[i] * entropy_term(v[i]);
  return 4.0 * tau * dirichlet_form(op, v, v) - ent - constant_term(tau, m);
}

std::vector<double> w_gradient(const DiscreteOperator& op, std::span<const double> v, double tau,
                               double m) {
  (void)m;
  const auto Lv = op.apply(v);
  std::vector<double> g(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = v[i] * v[i];
    const double d_ent = s > 0.0 ? 2.0 * v[i] * (std::log(s) + 1.0) : 0.0;
    g[i] = op.masses()[i] * (-8.0 * tau * Lv[i] - d_ent);
  }
  return g;
}

double l2_norm(const DiscreteOperator& op, std::span<const double> v) {
  return std::sqrt(inner(op, v, v));
}

std::vector<double> normalized(const DiscreteOperator& op, std::span<const double> v) {
  const double n = l2_norm(op, v);
  if (!(n > 0.0)) throw std::invalid_argument("normalized: zero function");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

double w_of_v(const DiscreteOperator& op, std::span<const double> v, double tau, double m) {
  if (!(tau > 0.0)) throw std::invalid_argument("w_of_v: tau must be positive");
  const double norm2 = inner(op, v, v);
  if (std::abs(norm2 - 1.0) > 1e-8)
    throw std::invalid_argument("w_of_v: v must satisfy int v^2 dmu = 1");
  return w_functional(op, v, tau, m);
}

namespace {

std::vector<double> bump(const ModelSpace& space, double center, double sd) {
  std::vector<double> u(space.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = displacement(space, center, space.x(i));
    u[i] = std::exp(-d * d / (2.0 * sd * sd));
  }
  return u;
}

std::vector<double> sqrt_of(std::vector<double> u) {
  for (double& x : u) x = std::sqrt(x);
  return u;
}

double centre(const ModelSpace& space) { return space.lo() + 0.5 * space.length(); }

struct Descent {
  std::vector<double> v;
  double value = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Riemannian gradient on the sphere, expressed as an L^2(mu) vector.
std::vector<double> sphere_gradient(const DiscreteOperator& op, std::span<const double> v,
                                    double tau, double m) {
  auto g = w_gradient(op, v, tau, m);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] /= op.masses()[i];
  const double proj = inner(op, g, v);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= proj * v[i];
  return g;
}

Descent descend(const DiscreteOperator& op, std::vector<double> v, double tau, double m,
                const MuOptions& opt) {
  Descent d;
  v = normalized(op, v);
  double W = w_functional(op, v, tau, m);
  auto G = sphere_gradient(op, v, tau, m);
  double gn = l2_norm(op, G);
  double dmax = 0.0;
  for (double x : op.diag()) dmax = std::max(dmax, std::abs(x));
  double alpha = 1.0 / (8.0 * tau * dmax + 1.0);
  std::vector<double> trial(v.size());
  std::size_t it = 0;
  for (; it < opt.max_iterations && gn > opt.tol; ++it) {
    double step = alpha;
    double Wt = W;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < v.size(); ++i) trial[i] = v[i] - step * G[i];
      trial = normalized(op, trial);
      Wt = w_functional(op, trial, tau, m);
      if (Wt <= W - 1e-4 * step * gn * gn) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    auto Gt = sphere_gradient(op, trial, tau, m);
    double ss = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double s = trial[i] - v[i], y = Gt[i] - G[i];
      ss += op.masses()[i] * s * s;
      sy += op.masses()[i] * s * y;
    }
    alpha = sy > 0.0 ? ss / sy : 2.0 * step;
    v.swap(trial);
    G.swap(Gt);
    W = Wt;
    gn = l2_norm(op, G);
  }
  d.v = std::move(v);
  d.value = W;
  d.grad_norm = gn;
  d.iterations = it;
  d.converged = gn <= opt.tol;
  return d;
}

}  // namespace

std::vector<std::vector<double>> default_starts(const ModelSpace& space, const DiscreteOperator& op,
                                                std::size_t restarts) {
  const double L = space.length();
  const double c = centre(space);
  std::vector<std::vector<double>> starts;
  starts.push_back(std::vector<double>(space.size(), 1.0));
  starts.push_back(sqrt_of(bump(space, c, L / 12.0)));
  auto two = bump(space, c - L / 8.0, L / 16.0);
  const auto second = bump(space, c + L / 10.0, L / 20.0);
  for (std::size_t i = 0; i < two.size(); ++i) two[i] += 0.6 * second[i];
  starts.push_back(sqrt_of(two));
  starts.resize(std::min(restarts, starts.size()));
  for (auto& s : starts) s = normalized(op, s);
  return starts;
}

MuEstimate minimize_mu(const ModelSpace& space, const DiscreteOperator& op, double tau, double m,
                       std::size_t restarts, const MuOptions& opt) {
  if (!(tau > 0.0)) throw std::invalid_argument("minimize_mu: tau must be positive");
  static const char* names[] = {"uniform", "gaussian_bump", "two_bump"};
  MuEstimate est;
  est.tau = tau;
  est.m = m;
  est.mu = kNaN;
  const auto starts = default_starts(space, op, restarts);
  double best = std::numeric_limits<double>::infinity();
  double lo = best, hi = -best;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const Descent d = descend(op, starts[k], tau, m, opt);
    RestartResult rr;
    rr.start = names[k];
    rr.value = d.value;
    rr.grad_norm = d.grad_norm;
    rr.iterations = d.iterations;
    rr.converged = d.converged;
    std::vector<double> u(d.v.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = d.v[i] * d.v[i];
    rr.boundary_mass = space.boundary_mass(u);
    rr.accepted = space.periodic() || rr.boundary_mass <= kBoundaryMassLimit;
    est.restarts.push_back(rr);
    if (!rr.accepted) continue;
    lo = std::min(lo, d.value);
    hi = std::max(hi, d.value);
    if (d.value < best) {
      best = d.value;
      est.mu = d.value;
      est.minimizer = std::move(u);
      est.iterations = d.iterations;
      est.grad_norm = d.grad_norm;
      est.converged = d.converged;
    }
  }
  est.spread = hi >= lo ? hi - lo : kNaN;
  return est;
}

std::string MuEstimate::to_json() const {
  nlohmann::ordered_json j;
  auto num = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  j["tau"] = tau;
  j["m"] = m;
  j["mu"] = num(mu);
  j["iterations"] = iterations;
  j["grad_norm"] = num(grad_norm);
  j["converged"] = converged;
  j["spread"] = num(spread);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : restarts) {
    arr.push_back({{"start", r.start},
                   {"value", num(r.value)},
                   {"grad_norm", num(r.grad_norm)},
                   {"iterations", r.iterations},
                   {"converged", r.converged},
                   {"boundary_mass", num(r.boundary_mass)},
                   {"accepted", r.accepted}});
  }
  j["restarts"] = arr;
  return j.dump(2);
}

void MuEstimate::write_minimizer_csv(const std::string& path, const ModelSpace& space) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "x,u\n" << std::setprecision(17);
  for (std::size_t i = 0; i < minimizer.size(); ++i) out << space.x(i) << ',' << minimizer[i] << '\n';
}

std::vector<std::vector<double>> trial_battery(const ModelSpace& space, const DiscreteOperator& op) {
  const double L = space.length();
  const double c = centre(space);
  std::vector<std::vector<double>> trials;
  trials.push_back(sqrt_of(bump(space, c, L / 30.0)));
  trials.push_back(sqrt_of(bump(space, c, L / 6.0)));
  trials.push_back(sqrt_of(bump(space, c + L / 7.0, L / 15.0)));
  auto mod = bump(space, c, L / 8.0);
  for (std::size_t i = 0; i < mod.size(); ++i)
    mod[i] *= 1.0 + 0.5 * std::cos(6.0 * std::numbers::pi * (space.x(i) - space.lo()) / L);
  trials.push_back(sqrt_of(mod));
  trials.push_back(sqrt_of(bump(space, c - L / 9.0, 2.0 * space.h())));
  for (auto& t : trials) t = normalized(op, t);
  return trials;
}

CheckReport lsi_check(const ModelSpace& space, const DiscreteOperator& op,
                      std::span<const std::vector<double>> trials, double tau, double m,
                      const MuEstimate& mu, double tol) {
  CheckReport r;
  r.name = "lsi_check";
  r.tolerance = tol;
  r.constants["tau"] = tau;
  r.constants["mu"] = mu.mu;
  if (!std::isfinite(mu.mu)) {
    r.margin = kNaN;
    r.verdict = Verdict::inconclusive;
    r.note = "no localized minimizer";
    return r;
  }
  for (const auto& t : trials) {
    const auto v = normalized(op, t);
    double lhs = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) lhs += op.masses()[i] * entropy_term(v[i]);
    const double rhs = 4.0 * tau * dirichlet_form(op, v, v) - constant_term(tau, m) - mu.mu;
    std::size_t peak = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (std::abs(v[i]) > std::abs(v[peak])) peak = i;
    r.consider(rhs - lhs, {tau, space.x(peak), kNaN, lhs, rhs});
  }
  r.decide();
  return r;
}

double gaussian_l2_distance(const ModelSpace& space, std::span<const double> u, double tau) {
  double c;
  if (space.periodic()) {
    double s = 0.0, co = 0.0;
    const double k = 2.0 * std::numbers::pi / space.length();
    for (std::size_t i = 0; i < u.size(); ++i) {
      s += space.mass(i) * u[i] * std::sin(k * (space.x(i) - space.lo()));
      co += space.mass(i) * u[i] * std::cos(k * (space.x(i) - space.lo()));
    }
    c = space.lo() + std::atan2(s, co) / k;
  } else {
    double mass = 0.0, first = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      mass += space.mass(i) * u[i];
      first += space.mass(i) * u[i] * space.x(i);
    }
    c = first / mass;
  }
  auto g = bump(space, c, std::sqrt(2.0 * tau));
  double gm = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) gm += space.mass(i) * g[i];
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = u[i] - g[i] / gm;
    acc += space.mass(i) * d * d;
  }
  return std::sqrt(acc);
}

CheckReport mu_lower_bound_scan(const ModelSpace& space, const DiscreteOperator& op, double m,
                                std::span<const double> tau_grid, std::vector<MuEstimate>* estimates,
                                const MuOptions& opt) {
  CheckReport r;
  r.name = "mu_lower_bound_scan";
  r.tolerance = 1e-6;
  double lower = std::numeric_limits<double>::infinity();
  bool finite = true;
  for (double tau : tau_grid) {
    MuEstimate e = minimize_mu(space, op, tau, m, 3, opt);
    if (!std::isfinite(e.mu)) {
      finite = false;
      ++r.excluded;
    } else {
      lower = std::min(lower, e.mu);
      r.refinement.push_back(e.mu);
      const auto g = normalized(op, sqrt_of(bump(space, centre(space), std::sqrt(2.0 * tau))));
      const double Wg = w_functional(op, g, tau, m);
      r.consider(Wg - e.mu, {tau, centre(space), kNaN, e.mu, Wg});
    }
    if (estimates) estimates->push_back(std::move(e));
  }
  r.constants["lower_bound"] = finite ? lower : kNaN;
  if (!finite) r.note = "some tau had no localized minimizer";
  r.decide();
  return r;
}

double w_gradient_fd_error(const DiscreteOperator& op, std::span<const double> v, double tau,
                           double m, std::size_t directions, std::uint64_t seed) {
  const Philox4x32 gen(seed);
  const auto g = w_gradient(op, v, tau, m);
  const double scale = l2_norm(op, v);
  if (!(scale > 0.0)) throw std::invalid_argument("w_gradient_fd_error: zero function");
  double gnorm = 0.0;
  const auto mass = op.masses();
  for (std::size_t i = 0; i < v.size(); ++i) gnorm += g[i] * g[i] / mass[i];
  gnorm = std::sqrt(gnorm);
  double worst = 0.0;
  std::vector<double> d(v.size()), vp(v.size()), vm(v.size());
  for (std::size_t k = 0; k < directions; ++k) {
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = normal_draw(gen, k, i) * v[i];
    const double dn = l2_norm(op, d);
    for (double& x : d) x *= scale / dn;
    const double eps = 1e-5;
    for (std::size_t i = 0; i < v.size(); ++i) {
      vp[i] = v[i] + eps * d[i];
      vm[i] = v[i] - eps * d[i];
    }
    const double fd = (w_functional(op, vp, tau, m) - w_functional(op, vm, tau, m)) / (2.0 * eps);
    double an = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) an += g[i] * d[i];
    worst = std::max(worst, std::abs(fd - an) / std::max(gnorm * scale, 1e-300));
  }
  return worst;
}

}  // namespace wlab
