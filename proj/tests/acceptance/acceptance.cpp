#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "wlab/config.hpp"
#include "wlab/entropy.hpp"
#include "wlab/geometry.hpp"
#include "wlab/harnack.hpp"
#include "wlab/heat_flow.hpp"
#include "wlab/lsi.hpp"
#include "wlab/runner.hpp"
#include "wlab/stochastic.hpp"
#include "wlab/witten_operator.hpp"

#ifndef WLAB_SCENARIO_DIR
#define WLAB_SCENARIO_DIR "scenarios"
#endif

using namespace wlab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAILED]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ScenarioConfig scenario(const std::string& name) {
  return load_config(std::string(WLAB_SCENARIO_DIR) + "/" + name + ".cfg");
}

SpaceSpec at_level(SpaceSpec s, std::size_t n) {
  s.nodes = n;
  return s;
}

SpaceSpec circle_cosine(std::size_t n) {
  SpaceSpec s;
  s.kind = SpaceKind::circle;
  s.nodes = n;
  s.length = 2.0 * kPi;
  s.potential = PotentialSpec::cosine(0.1);
  s.m = 3.0;
  return s;
}

SpaceSpec gaussian(std::size_t n) {
  SpaceSpec s;
  s.kind = SpaceKind::line;
  s.nodes = n;
  s.length = 12.0;
  s.origin = -6.0;
  s.potential = PotentialSpec::quadratic(1.0, 0.5 * std::log(2.0 * kPi));
  s.m = 40.0;
  return s;
}

SpaceSpec flat_line(std::size_t n) {
  SpaceSpec s;
  s.kind = SpaceKind::line;
  s.nodes = n;
  s.length = 24.0;
  s.origin = -12.0;
  s.m = 1.0;
  return s;
}

std::size_t nearest(const ModelSpace& s, double x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (std::abs(s.x(i) - x) < std::abs(s.x(best) - x)) best = i;
  return best;
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

/// Sources at fixed coordinates so every level samples the same points.
KernelSampling fixed_sampling(const ModelSpace& s, std::vector<double> times, double spread,
                              double wall_margin, std::size_t count = 32) {
  KernelSampling k;
  k.times = std::move(times);
  k.max_spread = spread;
  k.wall_margin = wall_margin;
  double a = s.lo(), b = s.hi();
  if (s.periodic()) {
    b -= s.length() / static_cast<double>(count);
  } else {
    a += std::max(wall_margin, 2.0 * s.h());
    b -= std::max(wall_margin, 2.0 * s.h());
  }
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t i = nearest(s, a + (b - a) * static_cast<double>(j) / (count - 1.0));
    if (k.sources.empty() || k.sources.back() != i) k.sources.push_back(i);
  }
  return k;
}

// Criterion 1 --------------------------------------------------------------

Outcome structural() {
  Outcome out;
  double worst_sym = 0.0, worst_row = 0.0, worst_ibp = 0.0;
  std::size_t spaces = 0;
  for (const char* name : {"euclid-rigidity", "gaussian-space", "circle-cosine", "flat-circle"}) {
    const auto cfg = scenario(name);
    for (const auto n : cfg.ladder) {
      const auto s = ModelSpace::build(at_level(cfg.space, n));
      const auto op = assemble(s);
      const auto M = op.dense();
      const auto mass = op.masses();
      double asym = 0.0, scale = 0.0, row = 0.0, diag = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          asym = std::max(asym, std::abs(mass[i] * M(i, j) - mass[j] * M(j, i)));
          scale = std::max(scale, std::abs(mass[i] * M(i, j)));
          r += M(i, j);
        }
        row = std::max(row, std::abs(r));
        diag = std::max(diag, std::abs(M(i, i)));
      }
      // Integration by parts from the face weights, independent of ibp_defect().
      const auto w = op.face_weights();
      auto form = [&](const std::vector<double>& u, const std::vector<double>& v) {
        double acc = 0.0;
        for (std::size_t f = 0; f < w.size(); ++f) {
          const std::size_t g = (f + 1) % n;
          acc += w[f] / s.h() * (u[g] - u[f]) * (v[g] - v[f]);
        }
        return acc;
      };
      std::vector<double> u(n), v(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double th = 2.0 * kPi * (s.x(i) - s.lo()) / s.length();
        u[i] = std::cos(2.0 * th) + 0.5 * std::sin(th);
        v[i] = std::exp(std::cos(3.0 * th));
      }
      const auto Lu = op.apply(u);
      double pairing = 0.0;
      for (std::size_t i = 0; i < n; ++i) pairing += mass[i] * Lu[i] * v[i];
      const double ibp = std::abs(form(u, v) + pairing) / std::sqrt(form(u, u) * form(v, v));
      worst_sym = std::max(worst_sym, asym / scale);
      worst_row = std::max(worst_row, row / diag);
      worst_ibp = std::max(worst_ibp, ibp);
      ++spaces;
    }
  }
  out.require(worst_sym <= 1e-12, "symmetry " + fmt("%.2e", worst_sym));
  out.require(worst_row <= 1e-12, "row sums " + fmt("%.2e", worst_row));
  out.require(worst_ibp <= 1e-12, "ibp " + fmt("%.2e", worst_ibp));
  out.detail += "; " + std::to_string(spaces) + " space levels";
  return out;
}

// Criterion 2 --------------------------------------------------------------

/// L^2(mu) norm of L|u'|^2 - 2u'(Lu)' - 2(u'')^2 - 2 Ric(L) u'^2 with
/// central differences, over nodes whose stencils stay off the walls.
double bochner_l2(const ModelSpace& s, const DiscreteOperator& op, const std::vector<double>& u,
                  const std::function<double(double)>& ric) {
  const std::size_t n = s.size();
  const double h = s.h();
  auto at = [&](const std::vector<double>& f, long i) {
    const long N = static_cast<long>(n);
    return f[static_cast<std::size_t>(s.periodic() ? ((i % N) + N) % N : i)];
  };
  const long N = static_cast<long>(n);
  const long lo = s.periodic() ? 0 : 2, hi = s.periodic() ? N : N - 2;
  std::vector<double> d1(n, 0.0), d1sq(n, 0.0);
  for (long i = s.periodic() ? 0 : 1; i < (s.periodic() ? N : N - 1); ++i) {
    d1[i] = (at(u, i + 1) - at(u, i - 1)) / (2.0 * h);
    d1sq[i] = d1[i] * d1[i];
  }
  const auto Lu = op.apply(u);
  const auto Lg = op.apply(d1sq);
  double acc = 0.0, mass = 0.0;
  for (long i = lo; i < hi; ++i) {
    const double dLu = (at(Lu, i + 1) - at(Lu, i - 1)) / (2.0 * h);
    const double d2 = (at(u, i + 1) - 2.0 * at(u, i) + at(u, i - 1)) / (h * h);
    const double def = Lg[i] - 2.0 * d1[i] * dLu - 2.0 * d2 * d2 - 2.0 * ric(s.x(i)) * d1sq[i];
    acc += s.mass(i) * def * def;
    mass += s.mass(i);
  }
  return std::sqrt(acc / mass);
}

Outcome bochner() {
  Outcome out;
  std::vector<double> circ, gauss;
  for (std::size_t n : {128, 256, 512}) {
    const auto c = ModelSpace::build(circle_cosine(n));
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::sin(c.x(i));
    circ.push_back(bochner_l2(c, assemble(c), u, [](double x) { return -0.1 * std::cos(x); }));
    const auto g = ModelSpace::build(gaussian(n));
    for (std::size_t i = 0; i < n; ++i) u[i] = std::pow(g.x(i), 3) - 3.0 * g.x(i);
    gauss.push_back(bochner_l2(g, assemble(g), u, [](double) { return 1.0; }));
  }
  for (std::size_t k = 1; k < 3; ++k) {
    out.require(order(circ[k - 1], circ[k]) >= 1.9, "circle order " + fmt("%.3f", order(circ[k - 1], circ[k])));
    out.require(order(gauss[k - 1], gauss[k]) >= 1.9, "gaussian order " + fmt("%.3f", order(gauss[k - 1], gauss[k])));
  }
  return out;
}

// Criterion 3 --------------------------------------------------------------

/// Ornstein-Uhlenbeck transition density with respect to the standard Gaussian.
double mehler(double t, double x, double y) {
  const double v = 1.0 - std::exp(-2.0 * t);
  const double d = y - x * std::exp(-t);
  return std::exp(-d * d / (2.0 * v) + 0.5 * y * y) / std::sqrt(v);
}

Outcome kernel_oracle() {
  Outcome out;
  const auto s = ModelSpace::build(gaussian(512));
  const HeatKernel kern(assemble(s));
  std::vector<std::size_t> window;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (std::abs(s.x(i)) <= 3.0) window.push_back(i);
  double worst = 0.0, pointwise = 0.0;
  for (double t : {0.1, 0.5, 1.0}) {
    const auto P = kern.matrix(t);
    double peak = 0.0, err = 0.0;
    for (auto i : window)
      for (auto j : window) peak = std::max(peak, mehler(t, s.x(i), s.x(j)));
    for (auto i : window)
      for (auto j : window) {
        const double q = mehler(t, s.x(i), s.x(j));
        err = std::max(err, std::abs(P(i, j) - q));
        if (q >= 1e-3 * peak) pointwise = std::max(pointwise, std::abs(P(i, j) - q) / q);
      }
    worst = std::max(worst, err / peak);
  }
  out.require(worst <= 1e-3, "max error/peak " + fmt("%.2e", worst));
  out.detail += "; pointwise rel where p >= 1e-3 peak " + fmt("%.2e", pointwise) + " (info)";
  std::size_t j = 0;
  while (s.x(j + 1) <= 0.0) ++j;
  const double w = -s.x(j) / (s.x(j + 1) - s.x(j));
  const auto P = kern.matrix(1.0);
  const double p00 = (1 - w) * ((1 - w) * P(j, j) + w * P(j, j + 1)) +
                     w * ((1 - w) * P(j + 1, j) + w * P(j + 1, j + 1));
  const double exact = 1.0 / std::sqrt(1.0 - std::exp(-2.0));
  out.require(std::abs(p00 - exact) <= 1e-3 && std::abs(exact - 1.0754) < 1e-4,
              "p_1(0,0) " + fmt("%.5f", p00) + " vs " + fmt("%.5f", exact));
  return out;
}

// Criterion 4 --------------------------------------------------------------

Outcome harnack_suite() {
  Outcome out;
  struct Fixture {
    const char* name;
    SpaceSpec spec;
    double K;
  };
  for (const auto& fx : {Fixture{"circle", circle_cosine(256), 0.1},
                         Fixture{"gaussian", gaussian(256), 0.0}}) {
    const auto s = ModelSpace::build(fx.spec);
    const auto op = assemble(s);
    std::vector<double> u0(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double d = geodesic_distance(s, s.x(i), 0.5);
      const double e = geodesic_distance(s, s.x(i), -1.0);
      u0[i] = std::exp(-d * d / 0.18) + 0.3 * std::exp(-e * e / 0.5) + 0.01;
    }
    const auto sol = solve(op, u0, 2.0, default_time_step(op), 4);
    const HeatKernel kern(op);
    const std::vector<double> Ts{0.05, 0.1, 0.5, 1.0, 2.0};
    const auto a = harnack_improved(s, sol, fx.K);
    const auto b = harnack_hamilton(s, sol, fx.K);
    const auto c = lsi_semigroup(s, kern, u0, fx.K, Ts);
    const std::string tag = fx.name;
    out.require(a.margin >= -1e-6 && a.verdict == Verdict::pass, tag + " improved " + fmt("%.3e", a.margin));
    out.require(b.margin >= -1e-6 && b.verdict == Verdict::pass, tag + " hamilton " + fmt("%.3e", b.margin));
    out.require(c.margin >= -1e-6 && c.verdict == Verdict::pass, tag + " semigroup " + fmt("%.3e", c.margin));
  }
  std::size_t violations = 0;
  for (double K : {0.0, 0.1, 1.0, 10.0}) {
    for (int k = 0; k < 100; ++k) {
      const double t = 1e-3 * std::pow(1e5, k / 99.0);
      const long double Kl = K, tl = t;
      const long double exact = K == 0.0 ? 1.0L / tl : 2.0L * Kl / -std::expm1(-2.0L * Kl * tl);
      if (!(harnack_coefficient(K, t) <= hamilton_coefficient(K, t))) ++violations;
      if (!(exact <= 2.0L * Kl + 1.0L / tl)) ++violations;
    }
  }
  out.require(violations == 0, "dominance violations " + std::to_string(violations));
  return out;
}

// Criterion 5 --------------------------------------------------------------

Outcome w_entropy_suite() {
  Outcome out;
  {
    const auto s = ModelSpace::build(flat_line(512));
    auto g = [&](double t) {
      std::vector<double> u(s.size());
      for (std::size_t i = 0; i < s.size(); ++i)
        u[i] = std::exp(-s.x(i) * s.x(i) / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
      return u;
    };
    double W = 0.0, dW = 0.0, bmass = 0.0;
    for (double t : {0.25, 0.5, 1.0, 2.0}) {
      const double r = 1.001;
      W = std::max(W, std::abs(w_entropy(s, g(t), t, 1.0)));
      dW = std::max(dW, std::abs((w_entropy(s, g(t * r), t * r, 1.0) -
                                  w_entropy(s, g(t / r), t / r, 1.0)) / (t * r - t / r)));
      bmass = std::max(bmass, s.boundary_mass(g(t)));
    }
    out.require(W <= 1e-3 && dW <= 1e-3 && bmass < 1e-8,
                "rigidity |W| " + fmt("%.1e", W) + " |dW| " + fmt("%.1e", dW));
  }
  for (const char* name : {"flat-circle", "gaussian-space", "euclid-rigidity"}) {
    const auto cfg = scenario(name);
    const auto s = ModelSpace::build(at_level(cfg.space, cfg.ladder.back()));
    const auto op = assemble(s);
    const HeatKernel kern(op);
    const auto times = geometric_times(cfg.solver.t0, cfg.solver.rho, cfg.solver.t_count);
    const auto tr = h_m_trace(s, op, kern, nearest(s, cfg.kernel.source), s.m(), times);
    out.require(s.K() == 0.0 && tr.max_w_increase() <= 1e-6,
                std::string(name) + " max increase " + fmt("%.1e", tr.max_w_increase()));
  }
  for (const char* name : {"circle-cosine", "gaussian-space"}) {
    const auto cfg = scenario(name);
    std::vector<double> res;
    for (const auto n : cfg.ladder) {
      const auto s = ModelSpace::build(at_level(cfg.space, n));
      const auto op = assemble(s);
      const HeatKernel kern(op);
      const auto times = geometric_times(cfg.solver.t0, cfg.solver.rho, cfg.solver.t_count);
      const auto tr = h_m_trace(s, op, kern, nearest(s, cfg.kernel.source), s.m(), times);
      double worst = 0.0;
      for (const auto& row : tr.rows) worst = std::max(worst, std::abs(row.residual_dW()));
      res.push_back(worst);
    }
    for (std::size_t k = 1; k < res.size(); ++k) {
      const double p = std::log(res[k - 1] / res[k]) /
                       std::log(static_cast<double>(cfg.ladder[k]) / cfg.ladder[k - 1]);
      out.require(p >= 1.5, std::string(name) + " dW order " + fmt("%.2f", p));
    }
  }
  return out;
}

// Criterion 6 --------------------------------------------------------------

Outcome entropy_identities() {
  Outcome out;
  for (const char* name : {"circle-cosine", "gaussian-space", "flat-circle"}) {
    const auto cfg = scenario(name);
    std::vector<double> rel;
    double hm = 0.0;
    for (const auto n : cfg.ladder) {
      const auto s = ModelSpace::build(at_level(cfg.space, n));
      const auto op = assemble(s);
      const HeatKernel kern(op);
      const double m = s.m();
      const auto times = geometric_times(cfg.solver.t0, cfg.solver.rho, cfg.solver.t_count);
      const auto tr = h_m_trace(s, op, kern, nearest(s, cfg.kernel.source), m, times);
      double d = 0.0, scale = 0.0;
      for (const auto& row : tr.rows) {
        d = std::max(d, std::abs(row.d2H_flux - row.d2H_bochner));
        scale = std::max(scale, std::abs(row.d2H_bochner));
        const double expect = row.d2H_bochner + m / (2.0 * row.t * row.t);
        hm = std::max(hm, std::abs(row.d2Hm - expect) / (std::abs(row.d2Hm) + std::abs(expect)));
      }
      rel.push_back(d / scale);
    }
    const double p = order(rel[rel.size() - 2], rel.back());
    out.require(p >= 1.5 && rel.back() <= 1e-3,
                std::string(name) + " d2H rel " + fmt("%.1e", rel.back()) + " order " + fmt("%.2f", p));
    out.require(hm <= 1e-12, std::string(name) + " Hm residual " + fmt("%.1e", hm));
  }
  return out;
}

// Criterion 7 --------------------------------------------------------------

Outcome kernel_bounds() {
  Outcome out;
  struct Fixture {
    const char* name;
    std::function<SpaceSpec(std::size_t)> spec;
    double spread, margin;
  };
  for (const auto& fx : {Fixture{"flat line", flat_line, 5.0, 3.0},
                         Fixture{"gaussian", gaussian, 5.0, 1.0}}) {
    std::vector<double> C1, C2;
    for (std::size_t n : {256, 512}) {
      const auto s = ModelSpace::build(fx.spec(n));
      const HeatKernel kern(assemble(s));
      const auto r = kernel_gaussian_bounds(s, kern, s.m(), s.K(), 0.1,
                                            fixed_sampling(s, {0.05, 0.1, 0.2, 0.5, 1.0}, fx.spread, fx.margin));
      C1.push_back(r.constants.at("C1"));
      C2.push_back(r.constants.at("C2"));
    }
    const double d1 = std::abs(C1[1] - C1[0]) / C1[1], d2 = std::abs(C2[1] - C2[0]) / C2[1];
    out.require(d1 <= 0.25 && d2 <= 0.25, std::string(fx.name) + " C1 " + fmt("%.4f", C1[1]) +
                                              " C2 " + fmt("%.4f", C2[1]) + " drift " +
                                              fmt("%.3f", std::max(d1, d2)));
    if (std::string(fx.name) == "flat line")
      out.require(std::abs(C2[1] - 1.0 / std::sqrt(kPi)) <= 1e-2, "flat C2 vs 1/sqrt(pi)");
  }
  out.require(lambda_km(8.0, 3.0) == 4.0, "lambda(8,3) " + fmt("%.17g", lambda_km(8.0, 3.0)));
  return out;
}

// Criterion 8 --------------------------------------------------------------

Outcome gradient_estimates() {
  Outcome out;
  {
    const auto s = ModelSpace::build(flat_line(512));
    const ModelSpace* sp = &s;
    const LogKernel euclid = [sp](double t, std::size_t y) {
      std::vector<double> lp(sp->size());
      for (std::size_t i = 0; i < sp->size(); ++i) {
        const double d = sp->x(i) - sp->x(y);
        lp[i] = -d * d / (4.0 * t) - 0.5 * std::log(4.0 * kPi * t);
      }
      return lp;
    };
    const auto r = log_kernel_gradient(s, euclid, fixed_sampling(s, {0.05, 0.1, 0.2, 0.5}, 0.0, 0.0));
    const double C = r.constants.at("C");
    out.require(std::abs(C - 0.5) <= 0.02, "euclidean C* " + fmt("%.4f", C));
  }
  struct Fixture {
    const char* name;
    std::function<SpaceSpec(std::size_t)> spec;
    double margin;
  };
  for (const auto& fx : {Fixture{"circle", circle_cosine, 0.0}, Fixture{"gaussian", gaussian, 1.0}}) {
    std::vector<double> C, C2;
    for (std::size_t n : {256, 512}) {
      const auto s = ModelSpace::build(fx.spec(n));
      const HeatKernel kern(assemble(s));
      const auto smp = fixed_sampling(s, {0.1, 0.2, 0.5, 1.0}, 5.0, fx.margin);
      C.push_back(log_kernel_gradient(s, spectral_log_kernel(kern, 1e-10), smp).constants.at("C"));
      C2.push_back(log_kernel_gradient_N2(s, spectral_log_kernel(kern, 1e-10), smp).constants.at("C2"));
    }
    const double d1 = std::abs(C[1] - C[0]) / C[1], d2 = std::abs(C2[1] - C2[0]) / C2[1];
    out.require(d1 <= 0.10 && d2 <= 0.10, std::string(fx.name) + " C* " + fmt("%.4f", C[1]) +
                                              " C2* " + fmt("%.4f", C2[1]) + " drift " +
                                              fmt("%.3f", std::max(d1, d2)));
  }
  return out;
}

// Criterion 9 --------------------------------------------------------------

Outcome stochastic_suite() {
  Outcome out;
  const auto s = ModelSpace::build(gaussian(512));
  const HeatKernel kern(assemble(s));
  const std::size_t ix = nearest(s, -1.5), iy = nearest(s, 1.5);
  SimulationOptions o;
  o.T = 1.0;
  o.dt = 1e-3;
  o.paths = 10000;
  o.seed = 20240611;
  o.record_until = 0.5;
  const auto fine = simulate_bridge(s, kern, s.x(ix), iy, o);
  auto oc = o;
  oc.dt = 2e-3;
  oc.coarsening = 2;
  const auto coarse = simulate_bridge(s, kern, s.x(ix), iy, oc);
  const auto b = bridge_energy_identity(s, kern, iy, fine, &coarse);
  const double gap = b.constants.at("relative_gap");
  const double band = b.ci_halfwidth.value() + std::abs(b.constants.at("dt_bias"));
  out.require(std::abs(gap) <= 0.05 && std::abs(gap) <= band,
              "bridge gap " + fmt("%+.4f", gap) + " band " + fmt("%.4f", band));
  const auto h = harnack_via_bridge(s, kern, ix, iy, fine, 0.0);
  out.require(h.margin >= -(h.ci_halfwidth.value_or(0.0) + 1e-3),
              "bridge harnack margin " + fmt("%.3f", h.margin));
  SimulationOptions ou;
  ou.T = 1.0;
  ou.dt = 1e-3;
  ou.paths = 10000;
  ou.seed = 20240611;
  ou.record_every = 1000;
  const auto free = simulate(s, s.x(ix), ou);
  const auto law = law_vs_kernel(s, kern, ix, free);
  out.require(law.constants.at("l1") <= 0.05, "law L1 " + fmt("%.4f", law.constants.at("l1")));
  return out;
}

// Criterion 10 -------------------------------------------------------------

Outcome mu_entropy() {
  Outcome out;
  const auto s = ModelSpace::build(flat_line(512));
  const auto op = assemble(s);
  const auto trials = trial_battery(s, op);
  for (double tau : {0.1, 0.25, 1.0}) {
    const auto est = minimize_mu(s, op, tau, 1.0);
    const auto& u = est.minimizer;
    double c = 0.0, total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) c += s.mass(i) * s.x(i) * u[i];
    std::vector<double> G(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      G[i] = std::exp(-(s.x(i) - c) * (s.x(i) - c) / (4.0 * tau));
      total += s.mass(i) * G[i];
    }
    double dist = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double e = u[i] - G[i] / total;
      dist += s.mass(i) * e * e;
    }
    dist = std::sqrt(dist);
    const std::string tag = "tau " + fmt("%g", tau);
    out.require(std::abs(est.mu) <= 1e-2 && dist <= 1e-2,
                tag + " mu " + fmt("%+.1e", est.mu) + " L2 " + fmt("%.1e", dist));
    const auto lsi = lsi_check(s, op, trials, tau, 1.0, est);
    out.require(lsi.margin >= -1e-6, tag + " lsi margin " + fmt("%.2e", lsi.margin));
    std::vector<double> v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) v[i] = std::sqrt(std::max(u[i], 0.0));
    const double fd = w_gradient_fd_error(op, v, tau, 1.0);
    out.require(fd <= 1e-6, tag + " grad fd " + fmt("%.1e", fd));
  }
  return out;
}

// Criterion 11 -------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  Outcome out;
  const auto cfg = scenario("gaussian-space");
  const fs::path root = fs::temp_directory_path() / "wlab_acceptance";
  fs::remove_all(root);
  const auto a = run(cfg, (root / "a").string());
  const auto b = run(cfg, (root / "b").string());
  const auto sa = slurp(root / "a" / "summary.csv");
  const auto sb = slurp(root / "b" / "summary.csv");
  out.require(!sa.empty() && sa == sb, "gaussian-space summary.csv " + std::to_string(sa.size()) +
                                           " bytes, identical=" + (sa == sb ? "yes" : "no"));
  fs::remove_all(root);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    Outcome (*fn)();
  };
  const Criterion criteria[] = {
      {1, "structural exactness", structural},
      {2, "Bochner defect order", bochner},
      {3, "Mehler kernel oracle", kernel_oracle},
      {4, "Harnack suite", harnack_suite},
      {5, "W-entropy", w_entropy_suite},
      {6, "entropy identities", entropy_identities},
      {7, "Gaussian kernel bounds", kernel_bounds},
      {8, "log-kernel gradient estimates", gradient_estimates},
      {9, "stochastic suite", stochastic_suite},
      {10, "mu-entropy", mu_entropy},
      {11, "reproducibility", reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %-30s %s  (%.1fs)  %s\n", c.id, c.title, o.pass ? "PASS" : "FAIL",
                secs, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
