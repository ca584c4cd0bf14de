#include "wlab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "wlab/entropy.hpp"
#include "wlab/geometry.hpp"
#include "wlab/harnack.hpp"
#include "wlab/heat_flow.hpp"
#include "wlab/lsi.hpp"
#include "wlab/registry.hpp"
#include "wlab/stochastic.hpp"
#include "wlab/witten_operator.hpp"

#ifndef WLAB_VERSION
#define WLAB_VERSION "0.0.0"
#endif

namespace wlab {

namespace fs = std::filesystem;

const char* version() { return WLAB_VERSION; }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

std::string num_or_empty(double v) { return std::isnan(v) ? std::string() : num(v); }

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::size_t nearest_node(const ModelSpace& space, double x) {
  std::size_t best = 0;
  double bd = kInf;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double d = geodesic_distance(space, space.x(i), x);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

CheckReport not_applicable(const std::string& name, const std::string& why) {
  CheckReport r;
  r.name = name;
  r.margin = kNaN;
  r.informational = true;
  r.verdict = Verdict::inconclusive;
  r.note = "not applicable: " + why;
  return r;
}

CheckReport identity_report(const std::string& name, double defect, double tol) {
  CheckReport r;
  r.name = name;
  r.tolerance = tol;
  r.evaluated = 1;
  r.margin = 0.0 - defect;
  r.decide();
  return r;
}

/// Worst margin over sub-reports; fail dominates inconclusive dominates pass.
CheckReport merge(const std::string& name, const std::vector<CheckReport>& parts) {
  CheckReport r;
  r.name = name;
  bool any_fail = false, any_inconclusive = false, first = true;
  for (const auto& p : parts) {
    if (first || p.margin < r.margin || (std::isnan(p.margin) && !std::isnan(r.margin))) {
      r.margin = p.margin;
      r.witness = p.witness;
      r.tolerance = p.tolerance;
      r.constants = p.constants;
      r.ci_halfwidth = p.ci_halfwidth;
      first = false;
    }
    r.evaluated += p.evaluated;
    r.excluded += p.excluded;
    r.boundary_mass = std::max(r.boundary_mass, p.boundary_mass);
    r.informational = r.informational || p.informational;
    any_fail = any_fail || p.verdict == Verdict::fail;
    any_inconclusive = any_inconclusive || p.verdict == Verdict::inconclusive;
    if (!p.note.empty() && r.note.find(p.note) == std::string::npos)
      r.note += (r.note.empty() ? "" : "; ") + p.note;
  }
  r.verdict = any_fail ? Verdict::fail : any_inconclusive ? Verdict::inconclusive : Verdict::pass;
  return r;
}

/// Observed convergence order of `values` over the ladder. Values at or below
/// `floor` on the two finest levels count as converged.
CheckReport order_report(const std::string& name, const std::vector<std::size_t>& ladder,
                         const std::vector<double>& values, double min_order, double floor) {
  CheckReport r;
  r.name = name;
  r.tolerance = 0.0;
  r.refinement = values;
  r.evaluated = values.size();
  const std::size_t L = values.size();
  if (L < 2) {
    r.margin = kNaN;
    r.note = "refinement needs two levels";
    r.verdict = Verdict::inconclusive;
    return r;
  }
  if (values[L - 1] <= floor && values[L - 2] <= floor) {
    r.margin = 0.0;
    r.note = "round-off floor reached";
    r.constants["order"] = kNaN;
    r.verdict = Verdict::pass;
    return r;
  }
  double worst = kInf;
  for (std::size_t k = 1; k < L; ++k) {
    const double order = std::log(values[k - 1] / values[k]) /
                         std::log(static_cast<double>(ladder[k]) / static_cast<double>(ladder[k - 1]));
    r.constants["order_" + std::to_string(ladder[k])] = order;
    if (std::isnan(order) || order < worst) worst = std::isnan(order) ? kNaN : order;
    if (std::isnan(worst)) break;
  }
  r.constants["order"] = worst;
  r.margin = worst - min_order;
  r.decide();
  return r;
}

double value_or_nan(const std::function<double()>& fn) {
  try {
    return fn();
  } catch (const std::exception&) {
    return kNaN;
  }
}

CheckReport level_value(const std::string& name, double value, const std::string& key) {
  CheckReport r;
  r.name = name;
  r.margin = -value;
  r.tolerance = kInf;
  r.evaluated = 1;
  r.informational = true;
  r.constants[key] = value;
  r.verdict = std::isfinite(value) ? Verdict::pass : Verdict::fail;
  return r;
}

struct Level {
  std::size_t N;
  ModelSpace space;
  DiscreteOperator op;
  HeatKernel kern;
  std::size_t source;

  Level(const ScenarioConfig& cfg, std::size_t nodes, const SpaceSpec& spec)
      : N(nodes), space(ModelSpace::build(spec)), op(assemble(space)), kern(op),
        source(nearest_node(space, cfg.kernel.source)) {}

  std::optional<HeatSolution> solution;
  std::vector<double> u0;
  std::optional<EntropyTrace> trace;
};

SpaceSpec level_spec(const ScenarioConfig& cfg, std::size_t nodes) {
  SpaceSpec s = cfg.space;
  s.nodes = nodes;
  return s;
}

bool flat_euclidean(const ModelSpace& s) {
  return s.kind() == SpaceKind::line && s.phi_constant() && s.n() == 1 && s.m() == 1.0;
}

bool gaussian_space(const ModelSpace& s) {
  return (s.kind() == SpaceKind::line || s.kind() == SpaceKind::interval) &&
         s.spec().potential.form == PotentialSpec::Form::quadratic && s.spec().potential.scale > 0;
}

class Runner {
 public:
  Runner(const ScenarioConfig& cfg, std::string out) : cfg_(cfg), out_(std::move(out)) {
    for (const auto& c : cfg.checks) wanted_.insert(c);
  }

  RunArtifact execute();

 private:
  bool want(const std::string& name) const { return wanted_.count(name) > 0; }
  double tol(const std::string& name, double fallback) const {
    return cfg_.tolerance(name, fallback);
  }

  void record(const std::string& name, std::size_t N, CheckReport r) {
    r.name = name;
    rows_.push_back({name, N, std::move(r)});
  }

  /// Evaluates `fn`, turning an exception into a failed report.
  CheckReport guarded(const std::string& name, const std::function<CheckReport()>& fn) {
    try {
      return fn();
    } catch (const std::exception& ex) {
      CheckReport r;
      r.name = name;
      r.margin = kNaN;
      r.verdict = Verdict::fail;
      r.note = std::string("error: ") + ex.what();
      return r;
    }
  }

  void write_file(const std::string& rel, const std::string& text) {
    const fs::path p = fs::path(out_) / rel;
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    f << text;
    files_.push_back(rel);
  }
  void note_file(const std::string& rel) { files_.push_back(rel); }
  std::string path(const std::string& rel) {
    const fs::path p = fs::path(out_) / rel;
    fs::create_directories(p.parent_path());
    return p.string();
  }

  std::vector<double> initial_data(const ModelSpace& s) const;
  HeatSolution& solution(Level& L);
  EntropyTrace& trace(Level& L);

  void level_checks(Level& L);
  void refinement_checks();
  void stochastic_checks(Level& L);
  void lsi_checks(Level& L);
  void write_outputs(const RunArtifact& art);

  CheckReport operator_structure(Level& L);
  CheckReport kernel_mehler(Level& L);
  CheckReport stochastic_completeness(Level& L);
  double bochner_defect_value(Level& L);
  double hamilton_jacobi_value(Level& L);
  KernelSampling sampling(const Level& L) const;
  LogKernel log_kernel(const Level& L) const;
  CheckReport w_rigidity(Level& L);

  const ScenarioConfig& cfg_;
  std::string out_;
  std::set<std::string> wanted_;
  std::vector<SummaryRow> rows_;
  std::vector<std::string> files_;
  std::map<std::string, std::vector<double>> level_values_;
  std::map<std::string, std::vector<CheckReport>> level_reports_;
};

std::vector<double> Runner::initial_data(const ModelSpace& s) const {
  std::vector<double> u(s.size());
  const double w = cfg_.solver.init_width;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = geodesic_distance(s, s.x(i), cfg_.solver.init_center);
    u[i] = cfg_.solver.init_floor + std::exp(-d * d / (2.0 * w * w));
  }
  return u;
}

HeatSolution& Runner::solution(Level& L) {
  if (!L.solution) {
    L.u0 = initial_data(L.space);
    const double dt = default_time_step(L.op, cfg_.solver.dt_factor);
    L.solution = solve(L.op, L.u0, cfg_.solver.t_end, dt, cfg_.solver.store_every);
  }
  return *L.solution;
}

EntropyTrace& Runner::trace(Level& L) {
  if (!L.trace) {
    const auto times = geometric_times(cfg_.solver.t0, cfg_.solver.rho, cfg_.solver.t_count);
    L.trace = h_m_trace(L.space, L.op, L.kern, L.source, L.space.m(), times);
    const auto rel = "traces/entropy_N" + std::to_string(L.N) + ".csv";
    L.trace->write_csv(path(rel));
    note_file(rel);
  }
  return *L.trace;
}

CheckReport Runner::operator_structure(Level& L) {
  const auto M = L.op.dense();
  const auto mass = L.op.masses();
  const std::size_t n = L.op.size();
  double asym = 0.0, scale = 0.0, rowsum = 0.0, diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = mass[i] * M(i, j);
      asym = std::max(asym, std::abs(a - mass[j] * M(j, i)));
      scale = std::max(scale, std::abs(a));
      row += M(i, j);
    }
    rowsum = std::max(rowsum, std::abs(row));
    diag = std::max(diag, std::abs(M(i, i)));
  }
  const double two_pi = 2.0 * std::numbers::pi;
  double ibp = 0.0;
  for (int k = 1; k <= 3; ++k) {
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = two_pi * (L.space.x(i) - L.space.lo()) / L.space.length();
      u[i] = std::cos(k * s) + 0.3 * std::sin(s);
      v[i] = std::exp(std::sin((k + 1) * s));
    }
    const double form_scale =
        std::sqrt(dirichlet_form(L.op, u, u) * dirichlet_form(L.op, v, v));
    ibp = std::max(ibp, ibp_defect(L.op, u, v) / (form_scale > 0.0 ? form_scale : 1.0));
  }
  CheckReport r = identity_report("operator_structure",
                                  std::max({asym / scale, rowsum / diag, ibp}),
                                  tol("operator_structure", 1e-12));
  r.constants["symmetry"] = asym / scale;
  r.constants["row_sum"] = rowsum / diag;
  r.constants["ibp"] = ibp;
  return r;
}

CheckReport Runner::kernel_mehler(Level& L) {
  const auto& s = L.space;
  if (!gaussian_space(s)) return not_applicable("kernel_mehler", "potential is not quadratic");
  const double a = s.spec().potential.scale;
  const double c = s.spec().potential.offset;
  std::vector<std::size_t> window;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (std::abs(s.x(i)) <= 3.0) window.push_back(i);
  CheckReport r;
  r.name = "kernel_mehler";
  r.tolerance = tol("kernel_mehler", 1e-3);
  for (const double t : {0.1, 0.5, 1.0}) {
    const double var = -std::expm1(-2.0 * a * t) / a;
    const double decay = std::exp(-a * t);
    auto oracle = [&](double x, double y) {
      const double d = y - x * decay;
      const double phi = 0.5 * a * y * y + c;
      return std::exp(-d * d / (2.0 * var) + phi) / std::sqrt(2.0 * std::numbers::pi * var);
    };
    const auto P = L.kern.matrix(t);
    double peak = 0.0;
    for (const auto i : window)
      for (const auto j : window) peak = std::max(peak, oracle(s.x(i), s.x(j)));
    for (const auto i : window)
      for (const auto j : window) {
        const double q = oracle(s.x(i), s.x(j));
        r.consider(-std::abs(P(i, j) - q) / peak, {t, s.x(i), s.x(j), P(i, j), q});
      }
    if (t == 1.0) {
      std::size_t j0 = 0;
      while (j0 + 2 < s.size() && s.x(j0 + 1) <= 0.0) ++j0;
      const double w = (0.0 - s.x(j0)) / (s.x(j0 + 1) - s.x(j0));
      auto row = [&](std::size_t i) { return (1 - w) * P(i, j0) + w * P(i, j0 + 1); };
      r.constants["p1_00"] = (1 - w) * row(j0) + w * row(j0 + 1);
    }
  }
  r.decide();
  return r;
}

CheckReport Runner::stochastic_completeness(Level& L) {
  const auto mass = L.op.masses();
  double mass_def = 0.0, sym = 0.0;
  CheckReport r;
  r.name = "stochastic_completeness";
  r.tolerance = tol("stochastic_completeness", 1e-9);
  for (const double t : cfg_.kernel.times) {
    const auto P = L.kern.matrix(t);
    const double peak = P.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      double total = 0.0;
      for (Eigen::Index i = 0; i < P.rows(); ++i) total += P(i, j) * mass[i];
      const double d = std::abs(total - 1.0);
      if (d > mass_def) {
        mass_def = d;
        r.witness = {t, kNaN, L.space.x(j), total, 1.0};
      }
      for (Eigen::Index i = 0; i < j; ++i)
        sym = std::max(sym, std::abs(P(i, j) - P(j, i)) / peak);
    }
  }
  r.evaluated = cfg_.kernel.times.size();
  r.margin = -mass_def;
  r.constants["mass_defect"] = mass_def;
  r.constants["symmetry"] = sym;
  r.decide();
  if (sym > 1e-12) {
    r.verdict = Verdict::fail;
    r.note = "kernel asymmetry above 1e-12";
  }
  return r;
}

double Runner::bochner_defect_value(Level& L) {
  const auto& s = L.space;
  std::vector<double> u(s.size());
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s.x(i);
    const double th = two_pi * (x - s.lo()) / s.length();
    if (s.periodic())
      u[i] = std::sin(th);
    else if (gaussian_space(s))
      u[i] = x * x * x - 3.0 * x;
    else
      u[i] = std::cos(th);
  }
  const auto d = bochner_defect(s, L.op, u);
  double sq = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) sq += s.mass(i) * d[i] * d[i];
  return std::sqrt(sq / s.total_mass());
}

double Runner::hamilton_jacobi_value(Level& L) {
  const double T = *std::max_element(cfg_.kernel.times.begin(), cfg_.kernel.times.end());
  const std::vector<double> times{0.0, 0.25 * T, 0.5 * T, 0.75 * T};
  return hamilton_jacobi_defect(L.space, L.op, L.kern, T, L.source, times, 1e-3 * T, 1e-6)
      .max_defect;
}

KernelSampling Runner::sampling(const Level& L) const {
  KernelSampling s;
  s.times = cfg_.kernel.times;
  s.stride = std::max<std::size_t>(1, L.N / cfg_.kernel.samples);
  s.max_spread = cfg_.kernel.model == "euclidean" ? 0.0 : cfg_.kernel.spread;
  s.wall_margin = cfg_.kernel.wall_margin;
  const auto& sp = L.space;
  const std::size_t k = cfg_.kernel.samples;
  double a = sp.lo(), b = sp.hi();
  if (sp.periodic()) {
    b -= sp.length() / static_cast<double>(k);
  } else {
    a += std::max(s.wall_margin, static_cast<double>(kWallSkip) * sp.h());
    b -= std::max(s.wall_margin, static_cast<double>(kWallSkip) * sp.h());
  }
  for (std::size_t j = 0; j < k; ++j) {
    const double x = k == 1 ? 0.5 * (a + b) : a + (b - a) * static_cast<double>(j) / (k - 1.0);
    const std::size_t i = nearest_node(sp, x);
    if (s.sources.empty() || s.sources.back() != i) s.sources.push_back(i);
  }
  return s;
}

LogKernel Runner::log_kernel(const Level& L) const {
  if (cfg_.kernel.model == "euclidean") {
    const ModelSpace* s = &L.space;
    return [s](double t, std::size_t y) {
      std::vector<double> out(s->size());
      for (std::size_t i = 0; i < s->size(); ++i) {
        const double d = displacement(*s, s->x(i), s->x(y));
        out[i] = -d * d / (4.0 * t) - 0.5 * std::log(4.0 * std::numbers::pi * t);
      }
      return out;
    };
  }
  return spectral_log_kernel(L.kern, 1e-10);
}

CheckReport Runner::w_rigidity(Level& L) {
  const auto& s = L.space;
  if (!flat_euclidean(s)) return not_applicable("w_rigidity", "space is not the flat line with m = 1");
  const double y = s.x(L.source);
  const double c = s.spec().potential.offset;
  auto gaussian = [&](double t) {
    std::vector<double> u(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double d = s.x(i) - y;
      u[i] = std::exp(c - d * d / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
    }
    return u;
  };
  CheckReport r;
  r.name = "w_rigidity";
  r.tolerance = tol("w_rigidity", 1e-3);
  const double rho = 1.0 + 1e-3;
  for (const double t : geometric_times(cfg_.solver.t0, cfg_.solver.rho, cfg_.solver.t_count)) {
    const auto u = gaussian(t);
    const double W = w_entropy(s, u, t, 1.0);
    const double dW = (w_entropy(s, gaussian(t * rho), t * rho, 1.0) -
                       w_entropy(s, gaussian(t / rho), t / rho, 1.0)) /
                      (t * rho - t / rho);
    r.consider(-std::max(std::abs(W), std::abs(dW)), {t, y, kNaN, W, dW});
    r.boundary_mass = std::max(r.boundary_mass, s.boundary_mass(u));
    r.constants["W_max_abs"] = std::max(r.constants["W_max_abs"], std::abs(W));
    r.constants["dW_max_abs"] = std::max(r.constants["dW_max_abs"], std::abs(dW));
  }
  r.decide();
  return r;
}

void Runner::level_checks(Level& L) {
  auto& s = L.space;
  const double m = s.m();
  const bool finite_m = std::isfinite(m);
  const std::size_t N = L.N;

  if (want("operator_structure"))
    record("operator_structure", N, guarded("operator_structure", [&] { return operator_structure(L); }));
  if (want("bochner"))
    level_values_["bochner"].push_back(value_or_nan([&] { return bochner_defect_value(L); }));
  if (want("kernel_mehler"))
    record("kernel_mehler", N, guarded("kernel_mehler", [&] { return kernel_mehler(L); }));
  if (want("stochastic_completeness"))
    record("stochastic_completeness", N,
           guarded("stochastic_completeness", [&] { return stochastic_completeness(L); }));
  if (want("hamilton_jacobi"))
    level_values_["hamilton_jacobi"].push_back(
        value_or_nan([&] { return hamilton_jacobi_value(L); }));

  if (want("bishop_gromov"))
    record("bishop_gromov", N, guarded("bishop_gromov", [&] {
             if (!finite_m) return not_applicable("bishop_gromov", "m is infinite");
             std::vector<CheckReport> parts;
             for (const double t : cfg_.kernel.times)
               parts.push_back(bishop_gromov_ratio_check(s, m, s.K(), t, s.x(L.source),
                                                         tol("bishop_gromov", 1e-12)));
             return merge("bishop_gromov", parts);
           }));
  if (want("relative_volume"))
    record("relative_volume", N, guarded("relative_volume", [&] {
             if (!finite_m) return not_applicable("relative_volume", "m is infinite");
             std::vector<CheckReport> parts;
             for (const double t : cfg_.kernel.times)
               parts.push_back(relative_volume_check(s, m, s.K(), t, sampling(L).stride,
                                                     tol("relative_volume", 1e-12)));
             return merge("relative_volume", parts);
           }));

  if (want("harnack_improved"))
    record("harnack_improved", N, guarded("harnack_improved", [&] {
             return harnack_improved(s, solution(L), s.K_L(), tol("harnack_improved", 1e-6));
           }));
  if (want("harnack_hamilton"))
    record("harnack_hamilton", N, guarded("harnack_hamilton", [&] {
             return harnack_hamilton(s, solution(L), s.K_L(), tol("harnack_hamilton", 1e-6));
           }));
  if (want("lsi_semigroup"))
    record("lsi_semigroup", N, guarded("lsi_semigroup", [&] {
             solution(L);
             return lsi_semigroup(s, L.kern, L.u0, s.K_L(), cfg_.kernel.times,
                                  tol("lsi_semigroup", 1e-6));
           }));
  if (want("harnack_drift_form"))
    record("harnack_drift_form", N,
           guarded("harnack_drift_form", [&] { return harnack_drift_form(s, solution(L), s.K_L()); }));
  if (want("liouville"))
    record("liouville", N, guarded("liouville", [&] { return liouville_check(s, L.op); }));

  if (want("kernel_gaussian_bounds"))
    level_reports_["kernel_gaussian_bounds"].push_back(guarded("kernel_gaussian_bounds", [&] {
      if (!finite_m) return not_applicable("kernel_gaussian_bounds", "m is infinite");
      return kernel_gaussian_bounds(s, L.kern, m, s.K(), cfg_.kernel.eps, sampling(L));
    }));
  if (want("log_kernel_gradient"))
    level_reports_["log_kernel_gradient"].push_back(guarded("log_kernel_gradient", [&] {
      return log_kernel_gradient(s, log_kernel(L), sampling(L));
    }));
  if (want("log_kernel_gradient_N2"))
    level_reports_["log_kernel_gradient_N2"].push_back(guarded("log_kernel_gradient_N2", [&] {
      return log_kernel_gradient_N2(s, log_kernel(L), sampling(L));
    }));

  const bool entropy_wanted = want("entropy_d2H") || want("hm_identity") || want("w_identity") ||
                              want("w_monotonicity") || want("w_dissipation");
  if (entropy_wanted && !finite_m) {
    for (const char* name : {"entropy_d2H", "hm_identity", "w_identity", "w_monotonicity",
                             "w_dissipation"})
      if (want(name)) record(name, N, not_applicable(name, "m is infinite"));
  } else if (entropy_wanted) {
    std::optional<std::string> failure;
    try {
      trace(L);
    } catch (const std::exception& ex) {
      failure = ex.what();
    }
    auto failed = [&](const std::string& name) {
      CheckReport r;
      r.name = name;
      r.margin = kNaN;
      r.verdict = Verdict::fail;
      r.note = "error: " + *failure;
      return r;
    };
    if (failure) {
      for (const char* name : {"entropy_d2H", "hm_identity", "w_identity", "w_monotonicity",
                               "w_dissipation"})
        if (want(name)) record(name, N, failed(name));
    } else {
      const auto& tr = *L.trace;
      double d2h = 0.0, d2h_scale = 0.0, hm = 0.0, w = 0.0, dw = 0.0, bmass = 0.0;
      for (const auto& row : tr.rows) {
        d2h = std::max(d2h, std::abs(row.residual_d2H()));
        d2h_scale = std::max(d2h_scale, std::abs(row.d2H_bochner));
        const double hm_scale =
            std::abs(row.d2Hm) + std::abs(row.d2H_bochner) + m / (2.0 * row.t * row.t);
        hm = std::max(hm, std::abs(row.residual_hm(m)) / hm_scale);
        w = std::max(w, std::abs(row.residual_w()) / (1.0 + std::abs(row.W_direct)));
        dw = std::max(dw, std::abs(row.residual_dW()));
        bmass = std::max(bmass, row.boundary_mass);
      }
      if (want("entropy_d2H")) level_values_["entropy_d2H"].push_back(d2h / d2h_scale);
      if (want("hm_identity")) {
        auto r = identity_report("hm_identity", hm, tol("hm_identity", 1e-12));
        r.evaluated = tr.rows.size();
        record("hm_identity", N, r);
      }
      if (want("w_identity")) {
        auto r = identity_report("w_identity", w, tol("w_identity", 1e-4));
        r.evaluated = tr.rows.size();
        record("w_identity", N, r);
      }
      if (want("w_dissipation")) level_values_["w_dissipation"].push_back(dw);
      if (want("w_monotonicity")) {
        CheckReport r = identity_report("w_monotonicity", std::max(0.0, tr.max_w_increase()),
                                        tol("w_monotonicity", 1e-6));
        r.evaluated = tr.rows.size();
        r.boundary_mass = bmass;
        r.constants["max_increase"] = tr.max_w_increase();
        r.constants["K"] = s.K();
        if (s.K() > 0.0) {
          r.informational = true;
          r.note = "Ric_{m,n}(L) takes negative values; monotonicity is not implied";
        }
        r.decide();
        record("w_monotonicity", N, r);
      }
    }
  }
  if (want("w_rigidity"))
    record("w_rigidity", N, guarded("w_rigidity", [&] { return w_rigidity(L); }));
}

void Runner::refinement_checks() {
  const std::size_t finest = cfg_.ladder.back();
  auto emit_levels = [&](const std::string& name, const std::string& key) {
    const auto& vals = level_values_[name];
    for (std::size_t k = 0; k + 1 < vals.size(); ++k)
      record(name, cfg_.ladder[k], level_value(name, vals[k], key));
  };
  auto order = [&](const std::string& name, const std::string& key, double min_order,
                   double floor) {
    if (!want(name)) return;
    emit_levels(name, key);
    auto r = order_report(name, cfg_.ladder, level_values_[name], tol(name, min_order), floor);
    r.tolerance = 0.0;
    r.constants[key] = level_values_[name].back();
    record(name, finest, r);
  };
  order("bochner", "defect", 1.9, 1e-11);
  order("hamilton_jacobi", "defect", 1.5, 1e-11);
  order("entropy_d2H", "relative_residual", 1.5, 1e-11);
  order("w_dissipation", "residual", 1.5, 1e-11);

  auto stability = [&](const std::string& name, std::vector<std::string> constants,
                       double max_drift) {
    if (!want(name)) return;
    const auto& levels = level_reports_[name];
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) record(name, cfg_.ladder[k], levels[k]);
    std::vector<CheckReport> parts;
    for (const auto& c : constants)
      parts.push_back(refinement_stability(name, levels, c, tol(name, max_drift)));
    auto r = merge(name, parts);
    r.constants = levels.back().constants;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      r.constants["drift_" + constants[k]] = parts[k].constants["drift"];
    }
    r.refinement.clear();
    for (const auto& l : levels) {
      const auto it = l.constants.find(constants.front());
      r.refinement.push_back(it == l.constants.end() ? kNaN : it->second);
    }
    r.informational = levels.back().informational;
    if (!levels.back().note.empty() && r.note.empty()) r.note = levels.back().note;
    record(name, finest, r);
  };
  stability("kernel_gaussian_bounds", {"C1", "C2"}, 0.25);
  stability("log_kernel_gradient", {"C"}, 0.10);
  stability("log_kernel_gradient_N2", {"C2"}, 0.10);
}

void Runner::stochastic_checks(Level& L) {
  const auto& s = L.space;
  const std::size_t N = L.N;
  const bool unconditioned = want("law_vs_kernel") || want("supermartingale_h");
  const bool bridged = want("bridge_energy_identity") || want("gradient_energy_derivative") ||
                       want("harnack_via_bridge");
  if (!unconditioned && !bridged) return;
  const std::size_t ix = nearest_node(s, cfg_.mc.x0);
  const std::size_t iy = nearest_node(s, cfg_.mc.y);
  const double T = cfg_.mc.T;
  const double dt = cfg_.mc.dt;

  SimulationOptions base;
  base.T = T;
  base.dt = dt;
  base.paths = cfg_.mc.paths;
  base.seed = cfg_.mc.seed;

  if (unconditioned) {
    const std::size_t every = 10;
    std::optional<DiffusionEnsemble> ens;
    std::string failure;
    try {
      SimulationOptions o = base;
      o.record_every = every;
      ens = simulate(s, s.x(ix), o);
      ens->write_moments_csv(path("traces/mc_moments.csv"));
      note_file("traces/mc_moments.csv");
    } catch (const std::exception& ex) {
      failure = ex.what();
    }
    auto failed = [&](const std::string& name) {
      CheckReport r;
      r.name = name;
      r.margin = kNaN;
      r.verdict = Verdict::fail;
      r.note = "error: " + failure;
      return r;
    };
    if (want("law_vs_kernel"))
      record("law_vs_kernel", N, ens ? guarded("law_vs_kernel", [&] {
        return law_vs_kernel(s, L.kern, ix, *ens, 16, tol("law_vs_kernel", 0.05));
      }) : failed("law_vs_kernel"));
    if (want("supermartingale_h"))
      record("supermartingale_h", N, ens ? guarded("supermartingale_h", [&] {
        const double interval = dt * static_cast<double>(every);
        const double target = default_time_step(L.op, cfg_.solver.dt_factor);
        const auto sub = static_cast<std::size_t>(std::ceil(interval / target - 1e-9));
        const auto u0 = initial_data(s);
        const auto sol = solve(L.op, u0, T, interval / static_cast<double>(sub), sub);
        return supermartingale_h(s, sol, s.K_L(), *ens);
      }) : failed("supermartingale_h"));
  }

  if (bridged) {
    std::optional<DiffusionEnsemble> fine, coarse;
    std::string failure;
    try {
      SimulationOptions o = base;
      o.record_until = 0.5 * T;
      fine = simulate_bridge(s, L.kern, s.x(ix), iy, o);
      SimulationOptions oc = o;
      oc.dt = 2.0 * dt;
      oc.coarsening = 2;
      coarse = simulate_bridge(s, L.kern, s.x(ix), iy, oc);
      fine->write_moments_csv(path("traces/bridge_moments.csv"));
      note_file("traces/bridge_moments.csv");
    } catch (const std::exception& ex) {
      failure = ex.what();
    }
    auto run_or_fail = [&](const std::string& name, const std::function<CheckReport()>& fn) {
      if (fine) return guarded(name, fn);
      CheckReport r;
      r.name = name;
      r.margin = kNaN;
      r.verdict = Verdict::fail;
      r.note = "error: " + failure;
      return r;
    };
    if (want("bridge_energy_identity"))
      record("bridge_energy_identity", N, run_or_fail("bridge_energy_identity", [&] {
        return bridge_energy_identity(s, L.kern, iy, *fine, &*coarse,
                                      tol("bridge_energy_identity", 0.05));
      }));
    if (want("gradient_energy_derivative"))
      record("gradient_energy_derivative", N, run_or_fail("gradient_energy_derivative", [&] {
        return gradient_energy_derivative(s, L.kern, iy, *fine, 0.25 * T, 0.02 * T,
                                          tol("gradient_energy_derivative", 1e-2));
      }));
    if (want("harnack_via_bridge"))
      record("harnack_via_bridge", N, run_or_fail("harnack_via_bridge", [&] {
        return harnack_via_bridge(s, L.kern, ix, iy, *fine, s.K_L(),
                                  tol("harnack_via_bridge", 1e-3));
      }));
  }
}

void Runner::lsi_checks(Level& L) {
  const auto& s = L.space;
  const std::size_t N = L.N;
  const bool wanted = want("mu_rigidity") || want("lsi_check") || want("w_gradient") ||
                      want("mu_lower_bound_scan");
  if (!wanted) return;
  const double m = s.m();
  if (!std::isfinite(m)) {
    for (const char* name : {"mu_rigidity", "lsi_check", "w_gradient", "mu_lower_bound_scan"})
      if (want(name)) record(name, N, not_applicable(name, "m is infinite"));
    return;
  }
  const bool per_tau = want("mu_rigidity") || want("lsi_check") || want("w_gradient");
  std::vector<MuEstimate> estimates;
  std::string failure;
  if (per_tau) {
    try {
      for (const double tau : cfg_.lsi.tau) {
        estimates.push_back(minimize_mu(s, L.op, tau, m));
        const auto stem = "mu/mu_tau_" + tag(tau);
        write_file(stem + ".json", estimates.back().to_json() + "\n");
        estimates.back().write_minimizer_csv(path(stem + ".csv"), s);
        note_file(stem + ".csv");
      }
    } catch (const std::exception& ex) {
      failure = ex.what();
    }
  }
  auto each = [&](const std::string& name, const std::function<CheckReport(const MuEstimate&)>& fn) {
    if (!want(name)) return;
    if (!failure.empty()) {
      CheckReport r;
      r.name = name;
      r.margin = kNaN;
      r.verdict = Verdict::fail;
      r.note = "error: " + failure;
      record(name, N, r);
      return;
    }
    std::vector<CheckReport> parts;
    for (const auto& est : estimates)
      parts.push_back(guarded(name, [&] { return fn(est); }));
    record(name, N, merge(name, parts));
  };

  each("mu_rigidity", [&](const MuEstimate& est) {
    if (!flat_euclidean(s)) return not_applicable("mu_rigidity", "space is not the flat line with m = 1");
    CheckReport r;
    r.name = "mu_rigidity";
    r.tolerance = tol("mu_rigidity", 1e-2);
    r.evaluated = 1;
    const double dist = gaussian_l2_distance(s, est.minimizer, est.tau);
    r.margin = -std::max(std::abs(est.mu), dist);
    r.witness.t = est.tau;
    r.witness.lhs = est.mu;
    r.witness.rhs = dist;
    r.constants["mu"] = est.mu;
    r.constants["gaussian_l2"] = dist;
    r.constants["tau"] = est.tau;
    if (std::isnan(est.mu)) {
      r.margin = kNaN;
      r.verdict = Verdict::inconclusive;
      r.note = "no accepted restart";
      return r;
    }
    r.decide();
    return r;
  });
  const auto trials = trial_battery(s, L.op);
  each("lsi_check", [&](const MuEstimate& est) {
    return lsi_check(s, L.op, trials, est.tau, m, est, tol("lsi_check", 1e-6));
  });
  each("w_gradient", [&](const MuEstimate& est) {
    std::vector<double> v(est.minimizer.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sqrt(std::max(est.minimizer[i], 0.0));
    auto r = identity_report("w_gradient", w_gradient_fd_error(L.op, v, est.tau, m),
                             tol("w_gradient", 1e-6));
    r.witness.t = est.tau;
    return r;
  });
  if (want("mu_lower_bound_scan"))
    record("mu_lower_bound_scan", N, guarded("mu_lower_bound_scan", [&] {
             std::vector<MuEstimate> scan;
             auto r = mu_lower_bound_scan(s, L.op, m, cfg_.lsi.scan, &scan);
             std::ostringstream csv;
             csv << "tau,mu,converged,grad_norm\n";
             for (const auto& e : scan)
               csv << num(e.tau) << ',' << num(e.mu) << ',' << (e.converged ? 1 : 0) << ','
                   << num(e.grad_norm) << '\n';
             write_file("mu/scan.csv", csv.str());
             return r;
           }));
}

std::string report_md(const ScenarioConfig& cfg, const RunArtifact& art) {
  std::ostringstream md;
  md << "# " << cfg.name << "\n\n";
  md << "config hash `" << art.config_hash << "`, ladder";
  for (const auto n : cfg.ladder) md << ' ' << n;
  md << ", finest level " << cfg.ladder.back() << "\n\n";
  md << "| check | anchor | verdict | margin | tolerance | note |\n";
  md << "|---|---|---|---|---|---|\n";
  for (const auto* row : art.finest()) {
    const auto* info = find_check(row->check);
    const auto& r = row->report;
    std::string verdict = verdict_name(r.verdict);
    if (r.informational) verdict += " (info)";
    md << "| " << row->check << " | " << (info ? info->anchor : "") << " | " << verdict << " | "
       << num(r.margin) << " | " << num(r.tolerance) << " | " << r.note << " |\n";
  }
  md << "\nOverall: " << (art.passed() ? "PASS" : "FAIL") << "\n\n";
  md << "## Statements\n\n";
  for (const auto* row : art.finest())
    if (const auto* info = find_check(row->check))
      md << "- `" << info->name << "` (" << info->anchor << "): " << info->statement << "\n";
  return md.str();
}

RunArtifact Runner::execute() {
  fs::create_directories(out_);
  std::vector<std::unique_ptr<Level>> levels;
  for (const std::size_t N : cfg_.ladder) {
    auto L = std::make_unique<Level>(cfg_, N, level_spec(cfg_, N));
    level_checks(*L);
    levels.push_back(std::move(L));
  }
  refinement_checks();
  Level& finest = *levels.back();
  stochastic_checks(finest);
  lsi_checks(finest);

  std::stable_sort(rows_.begin(), rows_.end(), [](const SummaryRow& a, const SummaryRow& b) {
    const auto order = [](const std::string& name) {
      const auto reg = check_registry();
      for (std::size_t k = 0; k < reg.size(); ++k)
        if (reg[k].name == name) return k;
      return reg.size();
    };
    if (order(a.check) != order(b.check)) return order(a.check) < order(b.check);
    return a.level < b.level;
  });

  RunArtifact art;
  art.config_hash = config_hash(cfg_);
  art.output_dir = out_;
  art.rows = rows_;
  write_outputs(art);
  art.files = files_;
  return art;
}

void Runner::write_outputs(const RunArtifact& art) {
  write_file("summary.csv", summary_csv(art.rows));
  for (const auto& row : art.rows)
    write_file("checks/" + row.check + "_N" + std::to_string(row.level) + ".json",
               to_json_string(row.report) + "\n");
  write_file("report.md", report_md(cfg_, art));
  std::ostringstream stamp;
  stamp << "{\"version\":\"" << version() << "\",\"scenario\":\"" << cfg_.name
        << "\",\"config_hash\":\"" << art.config_hash << "\",\"seed\":" << cfg_.mc.seed
        << ",\"finest_level\":" << cfg_.ladder.back()
        << ",\"passed\":" << (art.passed() ? "true" : "false") << "}\n";
  write_file("run.json", stamp.str());
}

}  // namespace

std::vector<const SummaryRow*> RunArtifact::finest() const {
  std::size_t top = 0;
  for (const auto& r : rows) top = std::max(top, r.level);
  std::vector<const SummaryRow*> out;
  for (const auto& r : rows)
    if (r.level == top) out.push_back(&r);
  return out;
}

bool RunArtifact::passed() const {
  for (const auto* r : finest())
    if (!r->report.informational && r->report.verdict != Verdict::pass) return false;
  return true;
}

RunArtifact run(const ScenarioConfig& config, const std::string& output_dir) {
  Runner runner(config, output_dir);
  return runner.execute();
}

std::string resolve_output_dir(const ScenarioConfig& config) {
  if (const char* root = std::getenv("WLAB_OUTPUT_ROOT"); root && *root)
    return (fs::path(root) / config.output_dir).string();
  return config.output_dir;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream csv;
  csv << "check,level,margin,tolerance,verdict,witness_t,witness_x,witness_y,ci_halfwidth\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    csv << row.check << ',' << row.level << ',' << num(r.margin) << ',' << num(r.tolerance) << ','
        << verdict_name(r.verdict) << ',' << num_or_empty(r.witness.t) << ','
        << num_or_empty(r.witness.x) << ',' << num_or_empty(r.witness.y) << ','
        << (r.ci_halfwidth ? num(*r.ci_halfwidth) : std::string()) << '\n';
  }
  return csv.str();
}

std::string list_checks_text() {
  std::ostringstream out;
  for (const auto& c : check_registry())
    out << c.name << " → " << c.anchor << "  " << c.statement << '\n';
  return out.str();
}

}  // namespace wlab
