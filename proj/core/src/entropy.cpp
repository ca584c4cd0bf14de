#include "wlab/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <stdexcept>

namespace wlab {

namespace {

void require_positive(std::span<const double> u, const char* who) {
  for (double v : u)
    if (!(v > 0.0)) throw std::invalid_argument(std::string(who) + ": density must be positive");
}

void require_finite_m(double m, const char* who) {
  if (!std::isfinite(m)) throw std::invalid_argument(std::string(who) + ": m must be finite");
}

std::vector<double> log_of(std::span<const double> u) {
  std::vector<double> l(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) l[i] = std::log(u[i]);
  return l;
}

// Angular Hessian factor (warp'/warp) of radial reductions; zero for n = 1.
double angular_factor(const ModelSpace& space, std::size_t i) {
  return space.n() > 1 ? space.dlog_density(i) / static_cast<double>(space.n() - 1) : 0.0;
}

double log4pi(double t) { return std::log(4.0 * std::numbers::pi * t); }

}  // namespace

double boltzmann_entropy(const ModelSpace& space, std::span<const double> u) {
  require_positive(u, "boltzmann_entropy");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc -= space.mass(i) * u[i] * std::log(u[i]);
  return acc;
}

double fisher_information(const ModelSpace& space, std::span<const double> u) {
  require_positive(u, "fisher_information");
  const auto g = gradient(space, log_of(u));
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += space.mass(i) * u[i] * g[i] * g[i];
  return acc;
}

EntropyDerivatives entropy_derivatives(const ModelSpace& space, const DiscreteOperator& op,
                                       std::span<const double> u) {
  require_positive(u, "entropy_derivatives");
  const std::size_t N = u.size();
  const auto logu = log_of(u);
  const auto Lu = op.apply(u);

  EntropyDerivatives d;
  for (std::size_t i = 0; i < N; ++i) d.dH -= space.mass(i) * Lu[i] * logu[i];

  double lu2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) lu2 += space.mass(i) * Lu[i] * Lu[i] / u[i];
  d.d2H_flux = -(lu2 - dirichlet_form(op, Lu, logu));

  const auto g = gradient(space, logu);
  const auto H = hessian(space, logu);
  double acc = 0.0;
  const double ang_copies = static_cast<double>(space.n() - 1);
  for (std::size_t i = 0; i < N; ++i) {
    const double a = g[i] * angular_factor(space, i);
    const double hess2 = H[i] * H[i] + ang_copies * a * a;
    acc += space.mass(i) * (hess2 + ric_L(space, i) * g[i] * g[i]) * u[i];
  }
  d.d2H_bochner = -2.0 * acc;
  return d;
}

double w_entropy(const ModelSpace& space, std::span<const double> u, double t, double m) {
  require_positive(u, "w_entropy");
  require_finite_m(m, "w_entropy");
  if (!(t > 0.0)) throw std::invalid_argument("w_entropy: t must be positive");
  const std::size_t N = u.size();
  std::vector<double> f(N);
  const double shift = 0.5 * m * log4pi(t);
  for (std::size_t i = 0; i < N; ++i) f[i] = -std::log(u[i]) - shift;
  const auto g = gradient(space, f);
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) acc += space.mass(i) * (t * g[i] * g[i] + f[i] - m) * u[i];
  return acc;
}

double w_entropy_via_hm(const ModelSpace& space, const DiscreteOperator& op,
                        std::span<const double> u, double t, double m) {
  require_finite_m(m, "w_entropy_via_hm");
  const double H = boltzmann_entropy(space, u);
  const auto d = entropy_derivatives(space, op, u);
  const double Hm = H - 0.5 * m * (1.0 + log4pi(t));
  const double dHm = d.dH - 0.5 * m / t;
  return Hm + t * dHm;
}

Dissipation dissipation_terms(const ModelSpace& space, std::span<const double> u, double t,
                              double m) {
  require_positive(u, "dissipation_terms");
  require_finite_m(m, "dissipation_terms");
  const std::size_t N = u.size();
  const double gap = m - static_cast<double>(space.n());
  if (gap == 0.0 && !space.phi_constant())
    throw ValidationError("m", "m = n requires a constant potential");

  std::vector<double> f(N);
  const double shift = 0.5 * m * log4pi(t);
  for (std::size_t i = 0; i < N; ++i) f[i] = -std::log(u[i]) - shift;
  const auto g = gradient(space, f);
  const auto H = hessian(space, f);
  const double half_inv_t = 0.5 / t;
  const double ang_copies = static_cast<double>(space.n() - 1);

  Dissipation d;
  double hess = 0.0, curv = 0.0, mn = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double radial = H[i] - half_inv_t;
    const double angular = g[i] * angular_factor(space, i) - half_inv_t;
    hess += space.mass(i) * (radial * radial + ang_copies * angular * angular) * u[i];
    curv += space.mass(i) * ric_mn(space, i, m) * g[i] * g[i] * u[i];
    if (gap > 0.0) {
      const double s = space.dphi(i) * g[i] + gap * half_inv_t;
      mn += space.mass(i) * s * s * u[i];
    }
  }
  d.hessian = -2.0 * t * hess;
  d.curvature = -2.0 * t * curv;
  d.mn = gap > 0.0 ? -(2.0 / gap) * t * mn : 0.0;
  return d;
}

std::vector<double> positive_slice(std::span<const double> p, double rel_floor) {
  const double pmax = *std::max_element(p.begin(), p.end());
  const double floor = std::max(rel_floor * pmax, kLogFloor);
  std::vector<double> out(p.begin(), p.end());
  for (double& v : out) v = std::max(v, floor);
  return out;
}

namespace {

// Three-point derivative at the middle of (t0, t1, t2), non-uniform spacing.
double middle_derivative(double t0, double t1, double t2, double f0, double f1, double f2) {
  const double h1 = t1 - t0, h2 = t2 - t1;
  return -h2 / (h1 * (h1 + h2)) * f0 + (h2 - h1) / (h1 * h2) * f1 + h1 / (h2 * (h1 + h2)) * f2;
}

}  // namespace

Dissipation w_dissipation(const ModelSpace& space, const HeatKernel& kern, std::size_t y_index,
                          double t, double m, double rho) {
  const auto u = positive_slice(kern.column(t, y_index));
  Dissipation d = dissipation_terms(space, u, t, m);
  const double tm = t / rho, tp = t * rho;
  const double wm = w_entropy(space, positive_slice(kern.column(tm, y_index)), tm, m);
  const double w0 = w_entropy(space, u, t, m);
  const double wp = w_entropy(space, positive_slice(kern.column(tp, y_index)), tp, m);
  d.fd = middle_derivative(tm, t, tp, wm, w0, wp);
  return d;
}

double EntropyRow::residual_hm(double m) const { return d2Hm - d2H_bochner - 0.5 * m / (t * t); }

void EntropyTrace::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,H,dH,fisher,d2H_flux,d2H_bochner,Hm,dHm,d2Hm,W_direct,W_eq37,dW_fd,dW_eq38,"
         "term_hessian,term_curvature,term_mn,dW_rhs,res_W,res_d2H,res_dW,res_Hm,boundary_mass\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.t << ',' << r.H << ',' << r.dH << ',' << r.fisher << ',' << r.d2H_flux << ','
        << r.d2H_bochner << ',' << r.Hm << ',' << r.dHm << ',' << r.d2Hm << ',' << r.W_direct << ','
        << r.W_eq37 << ',' << r.dW_fd << ',' << r.dW_eq38 << ',' << r.term_hessian << ','
        << r.term_curvature << ',' << r.term_mn << ',' << r.dW_rhs() << ',' << r.residual_w() << ','
        << r.residual_d2H() << ',' << r.residual_dW() << ',' << r.residual_hm(m) << ','
        << r.boundary_mass << '\n';
  }
}

double EntropyTrace::max_w_increase() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < rows.size(); ++j)
    worst = std::max(worst, rows[j].W_direct - rows[j - 1].W_direct);
  return worst;
}

std::vector<double> geometric_times(double t0, double rho, std::size_t count) {
  if (!(t0 > 0.0) || !(rho > 1.0)) throw std::invalid_argument("geometric_times: need t0 > 0, rho > 1");
  std::vector<double> t(count);
  for (std::size_t j = 0; j < count; ++j) t[j] = t0 * std::pow(rho, static_cast<double>(j));
  return t;
}

EntropyTrace h_m_trace(const ModelSpace& space, const DiscreteOperator& op, const HeatKernel& kern,
                       std::size_t y_index, double m, std::span<const double> times) {
  require_finite_m(m, "h_m_trace");
  EntropyTrace trace;
  trace.m = m;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    if (!(t > 0.0) || (j > 0 && !(t > times[j - 1])))
      throw std::invalid_argument("h_m_trace: times must be positive and increasing");
    const auto u = positive_slice(kern.column(t, y_index));
    EntropyRow r;
    r.t = t;
    r.H = boltzmann_entropy(space, u);
    const auto d = entropy_derivatives(space, op, u);
    r.dH = d.dH;
    r.fisher = fisher_information(space, u);
    r.d2H_flux = d.d2H_flux;
    r.d2H_bochner = d.d2H_bochner;
    r.Hm = r.H - 0.5 * m * (1.0 + log4pi(t));
    r.dHm = r.dH - 0.5 * m / t;
    r.d2Hm = r.d2H_bochner + 0.5 * m / (t * t);
    r.W_direct = w_entropy(space, u, t, m);
    r.W_eq37 = r.Hm + t * r.dHm;
    r.dW_eq38 = 2.0 * r.dHm + t * r.d2Hm;
    const auto diss = w_dissipation(space, kern, y_index, t, m);
    r.dW_fd = diss.fd;
    r.term_hessian = diss.hessian;
    r.term_curvature = diss.curvature;
    r.term_mn = diss.mn;
    r.boundary_mass = space.boundary_mass(u);
    trace.rows.push_back(r);
  }
  return trace;
}

}  // namespace wlab
