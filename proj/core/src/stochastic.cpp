#include "wlab/stochastic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <limits>
#include <stdexcept>

#include "wlab/harnack.hpp"
#include "wlab/rng.hpp"
#include "wlab/witten_operator.hpp"

namespace wlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double pairwise_sum(const double* a, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

void validate(const ModelSpace& space, const SimulationOptions& opt) {
  if (!(opt.T > 0.0)) throw ValidationError("mc.T", "horizon must be positive");
  if (!(opt.dt > 0.0)) throw ValidationError("mc.dt", "step must be positive");
  if (opt.paths < 1000) throw ValidationError("mc.paths", "at least 1000 paths required");
  if (opt.coarsening == 0) throw ValidationError("mc.coarsening", "must be at least 1");
  const double cap = space.length() / 10.0;
  if (std::sqrt(2.0 * opt.dt) > cap) throw ValidationError("mc.dt", "noise increment too large");
  double dmax = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) dmax = std::max(dmax, std::abs(space.drift(space.x(i))));
  if (dmax * opt.dt > cap) throw ValidationError("mc.dt", "drift increment too large");
}

std::size_t step_count(const SimulationOptions& opt) {
  return static_cast<std::size_t>(std::llround(opt.T / opt.dt));
}

bool recorded(const SimulationOptions& opt, std::size_t j, std::size_t steps) {
  const double t = static_cast<double>(j) * opt.dt;
  if (opt.record_until > 0.0 && t > opt.record_until + 1e-9 * opt.dt) return false;
  return j % std::max<std::size_t>(1, opt.record_every) == 0 || j == steps;
}

class Increments {
 public:
  Increments(const SimulationOptions& opt) : gen_(opt.seed), c_(opt.coarsening) {}
  double operator()(std::uint64_t path, std::uint64_t step) const {
    if (c_ == 1) return normal_draw(gen_, path, step);
    double s = 0.0;
    for (unsigned q = 0; q < c_; ++q) s += normal_draw(gen_, path, step * c_ + q);
    return s / std::sqrt(static_cast<double>(c_));
  }

 private:
  Philox4x32 gen_;
  unsigned c_;
};

DiffusionEnsemble prepare(const ModelSpace& space, double x0, const SimulationOptions& opt,
                          std::size_t last_step, std::size_t steps) {
  DiffusionEnsemble e;
  e.seed = opt.seed;
  e.paths = opt.paths;
  e.dt = opt.dt;
  e.x0 = space.fold(x0);
  e.periodic = space.periodic();
  e.horizon = opt.T;
  for (std::size_t j = 0; j <= last_step; ++j)
    if (recorded(opt, j, steps)) e.times.push_back(static_cast<double>(j) * opt.dt);
  return e;
}

}  // namespace

std::size_t DiffusionEnsemble::time_index(double t) const {
  std::size_t best = 0;
  for (std::size_t j = 1; j < times.size(); ++j)
    if (std::abs(times[j] - t) < std::abs(times[best] - t)) best = j;
  return best;
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("truncated path file");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return v;
}

}  // namespace

void DiffusionEnsemble::write_binary(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  put_u64(out, paths);
  put_u64(out, times.size());
  put_u64(out, std::bit_cast<std::uint64_t>(dt));
  for (double v : X) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

DiffusionEnsemble DiffusionEnsemble::read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  DiffusionEnsemble e;
  e.paths = get_u64(in);
  const std::uint64_t nt = get_u64(in);
  e.dt = std::bit_cast<double>(get_u64(in));
  e.X.resize(e.paths * nt);
  for (double& v : e.X) v = std::bit_cast<double>(get_u64(in));
  e.times.resize(nt);
  for (std::size_t j = 0; j < nt; ++j) e.times[j] = static_cast<double>(j) * e.dt;
  return e;
}

void DiffusionEnsemble::write_moments_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,mean,variance\n" << std::setprecision(17);
  std::vector<double> col(paths);
  for (std::size_t j = 0; j < times.size(); ++j) {
    for (std::size_t p = 0; p < paths; ++p) col[p] = at(p, j);
    const auto est = mc_mean(col);
    const double var = est.se * est.se * static_cast<double>(paths);
    out << times[j] << ',' << est.mean << ',' << var << '\n';
  }
}

McEstimate mc_mean(const std::vector<double>& samples) {
  McEstimate e;
  const std::size_t n = samples.size();
  if (n == 0) return {kNaN, kNaN};
  e.mean = pairwise_sum(samples.data(), n) / static_cast<double>(n);
  if (n < 2) {
    e.se = kNaN;
    return e;
  }
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (samples[i] - e.mean) * (samples[i] - e.mean);
  const double var = pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
  e.se = std::sqrt(var / static_cast<double>(n));
  return e;
}

DiffusionEnsemble simulate(const ModelSpace& space, double x0, const SimulationOptions& opt) {
  validate(space, opt);
  const std::size_t steps = step_count(opt);
  DiffusionEnsemble e = prepare(space, x0, opt, steps, steps);
  e.stop_time = opt.T;
  const std::size_t nt = e.times.size();
  e.X.assign(opt.paths * nt, 0.0);
  if (e.periodic) e.unwrapped.assign(opt.paths, 0.0);
  const Increments noise(opt);
  const double amp = std::sqrt(2.0 * opt.dt);

  std::vector<double> x(opt.paths, e.x0);
  std::size_t col = 0;
  for (std::size_t p = 0; p < opt.paths; ++p) e.X[p * nt] = x[p];
  ++col;
  for (std::size_t j = 1; j <= steps; ++j) {
    for (std::size_t p = 0; p < opt.paths; ++p) {
      const double inc = space.drift(x[p]) * opt.dt + amp * noise(p, j - 1);
      if (e.periodic) e.unwrapped[p] += inc;
      x[p] = space.fold(x[p] + inc);
    }
    if (col < nt && recorded(opt, j, steps)) {
      for (std::size_t p = 0; p < opt.paths; ++p) e.X[p * nt + col] = x[p];
      ++col;
    }
  }
  return e;
}

LogKernelSlice log_kernel_slice(const ModelSpace& space, const HeatKernel& kern, double s,
                                std::size_t y_index, double rel_floor) {
  LogKernelSlice sl;
  sl.s = s;
  auto p = kern.column(s, y_index);
  const double pmax = *std::max_element(p.begin(), p.end());
  const double floor = std::max(rel_floor * pmax, kLogFloor);
  for (double& v : p) v = v >= floor ? std::log(v) : kNaN;
  sl.logp = std::move(p);
  sl.grad = gradient(space, sl.logp);
  sl.hess = hessian(space, sl.logp);
  return sl;
}

double interpolate_field(const ModelSpace& space, const std::vector<double>& f, double x) {
  const std::size_t N = space.size();
  const double s = (space.fold(x) - space.lo()) / space.h();
  auto i = static_cast<std::size_t>(std::max(0.0, std::floor(s)));
  std::size_t k;
  if (space.periodic()) {
    i %= N;
    k = (i + 1) % N;
  } else {
    i = std::min(i, N - 2);
    k = i + 1;
  }
  const double a = std::clamp(s - std::floor(s), 0.0, 1.0);
  const double frac = (!space.periodic() && s >= static_cast<double>(N - 1)) ? 1.0 : a;
  if (std::isnan(f[i]) || std::isnan(f[k])) return kNaN;
  return (1.0 - frac) * f[i] + frac * f[k];
}

namespace {

double bridge_gradient(const ModelSpace& space, const LogKernelSlice& sl, double x, double y) {
  const double g = interpolate_field(space, sl.grad, x);
  if (!std::isnan(g)) return g;
  return displacement(space, x, y) / (2.0 * sl.s);
}

double bridge_hessian(const ModelSpace& space, const LogKernelSlice& sl, double x) {
  const double h = interpolate_field(space, sl.hess, x);
  return std::isnan(h) ? -1.0 / (2.0 * sl.s) : h;
}

}  // namespace

DiffusionEnsemble simulate_bridge(const ModelSpace& space, const HeatKernel& kern, double x0,
                                  std::size_t y_index, const SimulationOptions& opt,
                                  double rel_floor) {
  validate(space, opt);
  const std::size_t steps = step_count(opt);
  if (steps <= 10) throw ValidationError("mc.dt", "bridge needs more than 10 steps");
  const std::size_t stop = steps - 10;
  DiffusionEnsemble e = prepare(space, x0, opt, stop, steps);
  const double y = space.x(y_index);
  e.bridge = true;
  e.target = y;
  e.stop_time = static_cast<double>(stop) * opt.dt;
  const bool keep_final = !(opt.record_until > 0.0 && opt.T > opt.record_until + 1e-9 * opt.dt);
  if (keep_final) e.times.push_back(opt.T);
  const std::size_t nt = e.times.size();
  e.X.assign(opt.paths * nt, 0.0);
  if (e.periodic) e.unwrapped.assign(opt.paths, 0.0);
  const Increments noise(opt);
  const double amp = std::sqrt(2.0 * opt.dt);

  std::vector<double> x(opt.paths, e.x0);
  for (std::size_t p = 0; p < opt.paths; ++p) e.X[p * nt] = x[p];
  std::size_t col = 1;
  for (std::size_t j = 1; j <= stop; ++j) {
    const double s = opt.T - static_cast<double>(j - 1) * opt.dt;
    const auto sl = log_kernel_slice(space, kern, s, y_index, rel_floor);
    for (std::size_t p = 0; p < opt.paths; ++p) {
      const double b = space.drift(x[p]) + 2.0 * bridge_gradient(space, sl, x[p], y);
      const double inc = b * opt.dt + amp * noise(p, j - 1);
      if (e.periodic) e.unwrapped[p] += inc;
      x[p] = space.fold(x[p] + inc);
    }
    if (col < nt && recorded(opt, j, steps) && e.times[col] <= e.stop_time + 1e-12) {
      for (std::size_t p = 0; p < opt.paths; ++p) e.X[p * nt + col] = x[p];
      ++col;
    }
  }
  if (keep_final) {
    for (std::size_t p = 0; p < opt.paths; ++p) {
      if (e.periodic) e.unwrapped[p] += displacement(space, x[p], y);
      e.X[p * nt + nt - 1] = y;
    }
  }
  return e;
}

CheckReport law_vs_kernel(const ModelSpace& space, const HeatKernel& kern, std::size_t x0_index,
                          const DiffusionEnsemble& ens, std::size_t bins, double tol) {
  const std::size_t N = space.size();
  const double T = ens.times.back();
  const auto p = kern.column(T, x0_index);
  // Piecewise-linear CDF of p_T(x0, .) w dx at the nodes (plus the wrap node).
  const std::size_t cells = space.periodic() ? N : N - 1;
  std::vector<double> cum(cells + 1, 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t a = c, b = (c + 1) % N;
    cum[c + 1] = cum[c] + 0.5 * space.h() * (p[a] * space.weight(a) + p[b] * space.weight(b));
  }
  const double total = cum.back();
  auto cdf = [&](double x) {
    const double s = (space.fold(x) - space.lo()) / space.h();
    const auto c = std::min(static_cast<std::size_t>(std::max(0.0, s)), cells - 1);
    const double frac = std::clamp(s - static_cast<double>(c), 0.0, 1.0);
    return ((1.0 - frac) * cum[c] + frac * cum[c + 1]) / total;
  };
  std::vector<std::size_t> counts(bins, 0);
  const std::size_t j = ens.times.size() - 1;
  for (std::size_t q = 0; q < ens.paths; ++q) {
    const double F = cdf(ens.at(q, j));
    const auto k = std::min(bins - 1, static_cast<std::size_t>(F * static_cast<double>(bins)));
    ++counts[k];
  }
  double l1 = 0.0;
  const double pk = 1.0 / static_cast<double>(bins);
  for (std::size_t k = 0; k < bins; ++k)
    l1 += std::abs(static_cast<double>(counts[k]) / static_cast<double>(ens.paths) - pk);

  CheckReport r;
  r.name = "law_vs_kernel";
  r.tolerance = tol;
  r.evaluated = ens.paths;
  r.margin = -l1;
  r.witness = {T, ens.x0, kNaN, l1, tol};
  r.constants["l1"] = l1;
  r.constants["kernel_mass"] = total;
  r.constants["expected_mc_l1"] = static_cast<double>(bins) * std::sqrt(2.0 / std::numbers::pi) *
                                  std::sqrt(pk * (1.0 - pk) / static_cast<double>(ens.paths));
  r.ci_halfwidth = r.constants["expected_mc_l1"];
  r.decide();
  return r;
}

CheckReport supermartingale_h(const ModelSpace& space, const HeatSolution& sol, double K,
                              const DiffusionEnsemble& ens) {
  const double T = ens.horizon;
  const double A = sol.sup();
  const std::size_t nt = ens.times.size();
  CheckReport r;
  r.name = "supermartingale_h";
  r.tolerance = 0.0;
  r.constants["K"] = K;

  std::vector<std::vector<double>> values(nt, std::vector<double>(ens.paths));
  double h0 = kNaN;
  for (std::size_t j = 0; j < nt; ++j) {
    const double tau = T - ens.times[j];
    std::size_t k = 0;
    for (std::size_t q = 1; q < sol.times.size(); ++q)
      if (std::abs(sol.times[q] - tau) < std::abs(sol.times[k] - tau)) k = q;
    if (std::abs(sol.times[k] - tau) > 1e-9 + 1e-6 * T)
      throw std::invalid_argument("supermartingale_h: solution lacks time " + std::to_string(tau));
    const auto& u = sol.states[k];
    const auto g = gradient(space, u);
    const double psi = harnack_psi(K, std::max(tau, 0.0));
    std::vector<double> h(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      h[i] = u[i] > 0.0 ? psi * g[i] * g[i] / u[i] - u[i] * std::log(A / u[i]) : 0.0;
    for (std::size_t q = 0; q < ens.paths; ++q) values[j][q] = interpolate_field(space, h, ens.at(q, j));
    if (j == 0) h0 = interpolate_field(space, h, ens.x0);
  }
  double band = 0.0;
  std::vector<double> diff(ens.paths);
  for (std::size_t j = 0; j + 1 < nt; ++j) {
    for (std::size_t q = 0; q < ens.paths; ++q) diff[q] = values[j + 1][q] - values[j][q];
    const auto est = mc_mean(diff);
    band = std::max(band, est.halfwidth());
    r.consider(est.mean + est.halfwidth(), {ens.times[j + 1], kNaN, kNaN, est.mean, -est.halfwidth()});
  }
  const auto end = mc_mean(values[nt - 1]);
  r.consider(end.mean - h0 + end.halfwidth(), {T, ens.x0, kNaN, end.mean, h0});
  r.ci_halfwidth = band;
  r.constants["E_h_start"] = h0;
  r.constants["E_h_end"] = end.mean;
  r.decide();
  return r;
}

CheckReport bridge_energy_identity(const ModelSpace& space, const HeatKernel& kern,
                                   std::size_t y_index, const DiffusionEnsemble& ens,
                                   const DiffusionEnsemble* coarse, double rel_tol) {
  struct Gap {
    double lhs, rhs, gap, se;
    std::size_t excluded;
  };
  auto evaluate = [&](const DiffusionEnsemble& e) {
    const double T = e.horizon;
    const double y = space.x(y_index);
    const std::size_t mid = e.time_index(0.5 * T);
    if (std::abs(e.times[mid] - 0.5 * T) > 1e-9 * T)
      throw std::invalid_argument("bridge_energy_identity: T/2 not recorded");
    const auto s0 = log_kernel_slice(space, kern, T, y_index);
    const double J0 = interpolate_field(space, s0.logp, e.x0);
    std::vector<double> integral(e.paths, 0.0), jend(e.paths, kNaN);
    std::vector<double> prev(e.paths);
    for (std::size_t j = 0; j <= mid; ++j) {
      const auto sl = log_kernel_slice(space, kern, T - e.times[j], y_index);
      for (std::size_t q = 0; q < e.paths; ++q) {
        const double g = bridge_gradient(space, sl, e.at(q, j), y);
        const double cur = g * g;
        if (j > 0) integral[q] += 0.5 * (e.times[j] - e.times[j - 1]) * (prev[q] + cur);
        prev[q] = cur;
        if (j == mid) jend[q] = interpolate_field(space, sl.logp, e.at(q, j));
      }
    }
    std::vector<double> lhs, rhs, diff;
    std::size_t excluded = 0;
    for (std::size_t q = 0; q < e.paths; ++q) {
      if (std::isnan(jend[q])) {
        ++excluded;
        continue;
      }
      lhs.push_back(jend[q] - J0);
      rhs.push_back(integral[q]);
      diff.push_back(lhs.back() - rhs.back());
    }
    const auto L = mc_mean(lhs), R = mc_mean(rhs), D = mc_mean(diff);
    return Gap{L.mean, R.mean, D.mean / R.mean, D.se / std::abs(R.mean), excluded};
  };

  const Gap g = evaluate(ens);
  CheckReport r;
  r.name = "bridge_energy_identity";
  r.tolerance = 0.0;
  r.evaluated = ens.paths - g.excluded;
  r.excluded = g.excluded;
  const double hw = 1.96 * g.se;
  double bias = 0.0;
  if (coarse != nullptr) {
    const Gap c = evaluate(*coarse);
    bias = g.gap - c.gap;
    r.constants["gap_coarse"] = c.gap;
  }
  r.ci_halfwidth = hw;
  r.constants["lhs"] = g.lhs;
  r.constants["rhs"] = g.rhs;
  r.constants["relative_gap"] = g.gap;
  r.constants["dt_bias"] = bias;
  const double covered = hw + std::abs(bias) - std::abs(g.gap);
  const double within = rel_tol - std::abs(g.gap);
  r.margin = std::min(covered, within);
  r.witness = {0.5 * ens.horizon, ens.x0, space.x(y_index), g.lhs, g.rhs};
  r.decide();
  return r;
}

CheckReport gradient_energy_derivative(const ModelSpace& space, const HeatKernel& kern,
                                       std::size_t y_index, const DiffusionEnsemble& ens,
                                       double t, double delta, double fd_tol) {
  const double T = ens.horizon;
  const double y = space.x(y_index);
  auto index = [&](double s) {
    const std::size_t j = ens.time_index(s);
    if (std::abs(ens.times[j] - s) > 1e-9 * T)
      throw std::invalid_argument("gradient_energy_derivative: time not recorded");
    return j;
  };
  const std::size_t jm = index(t - delta), j0 = index(t), jp = index(t + delta);
  const auto sm = log_kernel_slice(space, kern, T - ens.times[jm], y_index);
  const auto s0 = log_kernel_slice(space, kern, T - ens.times[j0], y_index);
  const auto sp = log_kernel_slice(space, kern, T - ens.times[jp], y_index);
  std::vector<double> lhs(ens.paths), rhs(ens.paths), diff(ens.paths);
  for (std::size_t q = 0; q < ens.paths; ++q) {
    const double gm = bridge_gradient(space, sm, ens.at(q, jm), y);
    const double gp = bridge_gradient(space, sp, ens.at(q, jp), y);
    const double x = ens.at(q, j0);
    const double g = bridge_gradient(space, s0, x, y);
    const double h = bridge_hessian(space, s0, x);
    lhs[q] = (gp * gp - gm * gm) / (ens.times[jp] - ens.times[jm]);
    rhs[q] = 2.0 * (h * h + space.ric_L_at(x) * g * g);
    diff[q] = lhs[q] - rhs[q];
  }
  const auto L = mc_mean(lhs), R = mc_mean(rhs), D = mc_mean(diff);
  CheckReport r;
  r.name = "gradient_energy_derivative";
  r.evaluated = ens.paths;
  r.ci_halfwidth = D.halfwidth();
  r.tolerance = D.halfwidth() + fd_tol * std::abs(R.mean);
  r.margin = -std::abs(D.mean);
  r.witness = {t, ens.x0, y, L.mean, R.mean};
  r.constants["lhs"] = L.mean;
  r.constants["rhs"] = R.mean;
  r.constants["ratio"] = L.mean / R.mean;
  r.decide();
  return r;
}

CheckReport harnack_via_bridge(const ModelSpace& space, const HeatKernel& kern,
                               std::size_t x0_index, std::size_t y_index,
                               const DiffusionEnsemble& ens, double K, double grid_tol) {
  const double T = ens.horizon;
  const std::size_t mid = ens.time_index(0.5 * T);
  if (std::abs(ens.times[mid] - 0.5 * T) > 1e-9 * T)
    throw std::invalid_argument("harnack_via_bridge: T/2 not recorded");
  const auto sT = log_kernel_slice(space, kern, T, y_index);
  const auto sh = log_kernel_slice(space, kern, 0.5 * T, y_index);
  const double g = sT.grad[x0_index];
  const double lhs = g * g;
  const double c = 2.0 * (1.0 / T + K);
  std::vector<double> v;
  std::size_t excluded = 0;
  for (std::size_t q = 0; q < ens.paths; ++q) {
    const double l = interpolate_field(space, sh.logp, ens.at(q, mid));
    if (std::isnan(l)) {
      ++excluded;
      continue;
    }
    v.push_back(l - sT.logp[x0_index]);
  }
  const auto E = mc_mean(v);
  CheckReport r;
  r.name = "harnack_via_bridge";
  r.evaluated = v.size();
  r.excluded = excluded;
  const double rhs = c * E.mean;
  r.ci_halfwidth = c * E.halfwidth();
  r.tolerance = *r.ci_halfwidth + grid_tol;
  r.margin = rhs - lhs;
  r.witness = {T, space.x(x0_index), space.x(y_index), lhs, rhs};
  r.constants["K"] = K;
  r.constants["expectation"] = E.mean;
  r.decide();
  return r;
}

McEstimate girsanov_bridge_mean(const ModelSpace& space, const HeatKernel& kern,
                                std::size_t x0_index, std::size_t y_index, double T,
                                const DiffusionEnsemble& unconditioned, double t,
                                const std::function<double(double)>& F) {
  if (!(t < T)) throw std::invalid_argument("girsanov_bridge_mean: need t < T");
  const std::size_t j = unconditioned.time_index(t);
  const auto p = kern.column(T - unconditioned.times[j], y_index);
  const double norm = kern(T, x0_index, y_index);
  std::vector<double> v(unconditioned.paths);
  for (std::size_t q = 0; q < unconditioned.paths; ++q) {
    const double x = unconditioned.at(q, j);
    v[q] = F(x) * interpolate_field(space, p, x) / norm;
  }
  return mc_mean(v);
}

}  // namespace wlab
