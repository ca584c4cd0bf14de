#include "wlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace wlab {

namespace {

struct PhiJet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

double cosine_frequency(const SpaceSpec& spec) {
  const auto& p = spec.potential;
  return p.frequency > 0.0 ? p.frequency : 2.0 * std::numbers::pi / spec.length;
}

PhiJet symbolic_phi(const SpaceSpec& spec, double x) {
  const auto& p = spec.potential;
  switch (p.form) {
    case PotentialSpec::Form::constant:
      return {p.offset, 0.0, 0.0};
    case PotentialSpec::Form::quadratic:
      return {0.5 * p.scale * x * x + p.offset, p.scale * x, p.scale};
    case PotentialSpec::Form::cosine: {
      const double k = cosine_frequency(spec);
      const double s = x - spec.origin;
      return {p.scale * std::cos(k * s) + p.offset, -p.scale * k * std::sin(k * s),
              -p.scale * k * k * std::cos(k * s)};
    }
    case PotentialSpec::Form::tabulated:
      break;
  }
  return {};
}

double table_lookup(const std::vector<std::pair<double, double>>& table, double x) {
  auto it = std::lower_bound(table.begin(), table.end(), x,
                             [](const auto& row, double v) { return row.first < v; });
  if (it == table.end() || (it == table.begin() && it->first > x)) {
    const double tol = 1e-9 * (1.0 + std::abs(x));
    if (it == table.end() && std::abs(table.back().first - x) <= tol) return table.back().second;
    if (it == table.begin() && std::abs(table.front().first - x) <= tol) return table.front().second;
    throw ValidationError("space.phi.table", "node x=" + std::to_string(x) +
                                                 " lies outside the tabulated range");
  }
  if (it->first == x || it == table.begin()) return it->second;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double s = (x - lo.first) / (hi.first - lo.first);
  return lo.second + s * (hi.second - lo.second);
}

struct WarpJet {
  double f = 1.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

WarpJet warp_jet(Warp w, double r) {
  switch (w) {
    case Warp::flat:
      return {r, 1.0, 0.0};
    case Warp::sphere:
      return {std::sin(r), std::cos(r), -std::sin(r)};
    case Warp::hyperbolic:
      return {std::sinh(r), std::cosh(r), std::sinh(r)};
  }
  return {};
}

double wrap_offset(double s, double period) {
  double r = std::fmod(s, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

}  // namespace

const char* kind_name(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::circle:
      return "circle";
    case SpaceKind::interval:
      return "interval-reflecting";
    case SpaceKind::line:
      return "line-truncated";
    case SpaceKind::radial:
      return "radial-reduction";
  }
  return "circle";
}

SpaceKind parse_kind(const std::string& name) {
  if (name == "circle") return SpaceKind::circle;
  if (name == "interval" || name == "interval-reflecting") return SpaceKind::interval;
  if (name == "line" || name == "line-truncated") return SpaceKind::line;
  if (name == "radial" || name == "radial-reduction") return SpaceKind::radial;
  throw ValidationError("space.kind", "unknown kind '" + name + "'");
}

const char* warp_name(Warp w) {
  switch (w) {
    case Warp::flat:
      return "flat";
    case Warp::sphere:
      return "sphere";
    case Warp::hyperbolic:
      return "hyperbolic";
  }
  return "flat";
}

Warp parse_warp(const std::string& name) {
  if (name == "flat") return Warp::flat;
  if (name == "sphere") return Warp::sphere;
  if (name == "hyperbolic") return Warp::hyperbolic;
  throw ValidationError("space.warp", "unknown warp '" + name + "'");
}

PotentialSpec load_potential_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("space.phi.file", "cannot open '" + path + "'");
  PotentialSpec spec;
  spec.form = PotentialSpec::Form::tabulated;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x = 0.0, phi = 0.0;
    if (!(row >> x >> phi)) {
      if (spec.table.empty() && lineno == 1) continue;  // header
      throw ValidationError("space.phi.file",
                            path + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    spec.table.emplace_back(x, phi);
  }
  std::sort(spec.table.begin(), spec.table.end());
  if (spec.table.size() < 2) throw ValidationError("space.phi.file", "need at least two rows");
  return spec;
}

ModelSpace ModelSpace::build(const SpaceSpec& spec) {
  if (spec.nodes < 8) throw ValidationError("space.nodes", "need N >= 8");
  if (!(spec.length > 0.0)) throw ValidationError("space.length", "must be positive");
  if (spec.n < 1) throw ValidationError("space.n", "must be >= 1");
  if (std::isnan(spec.m) || spec.m < spec.n)
    throw ValidationError("space.m", "m must satisfy m >= n");
  if (spec.kind != SpaceKind::radial && spec.n != 1)
    throw ValidationError("space.n", "flat 1-D spaces represent n = 1");
  if (spec.kind == SpaceKind::radial) {
    if (!(spec.origin > 0.0))
      throw ValidationError("space.origin", "radial reductions need r_min > 0");
    if (spec.warp == Warp::sphere && spec.origin + spec.length >= std::numbers::pi)
      throw ValidationError("space.length", "spherical warp needs r_max < pi");
  }
  if (spec.potential.form == PotentialSpec::Form::tabulated && spec.potential.table.size() < 2)
    throw ValidationError("space.phi.table", "tabulated potential needs samples");

  ModelSpace s;
  s.spec_ = spec;
  const std::size_t N = spec.nodes;
  s.h_ = s.periodic() ? spec.length / static_cast<double>(N)
                      : spec.length / static_cast<double>(N - 1);
  s.x_.resize(N);
  for (std::size_t i = 0; i < N; ++i) s.x_[i] = spec.origin + s.h_ * static_cast<double>(i);
  if (!s.periodic()) s.x_[N - 1] = spec.origin + spec.length;

  s.phi_.resize(N);
  s.dphi_.resize(N);
  s.d2phi_.resize(N);
  if (spec.potential.form == PotentialSpec::Form::tabulated) {
    for (std::size_t i = 0; i < N; ++i) s.phi_[i] = table_lookup(spec.potential.table, s.x_[i]);
    const double h = s.h_;
    for (std::size_t i = 0; i < N; ++i) {
      if (s.periodic() || (i > 0 && i + 1 < N)) {
        const double pm = s.phi_[(i + N - 1) % N];
        const double pp = s.phi_[(i + 1) % N];
        s.dphi_[i] = (pp - pm) / (2.0 * h);
        s.d2phi_[i] = (pp - 2.0 * s.phi_[i] + pm) / (h * h);
      } else {
        // One-sided second-order stencils at the walls.
        const double sgn = (i == 0) ? 1.0 : -1.0;
        const std::size_t a = i, b = (i == 0) ? 1 : N - 2, c = (i == 0) ? 2 : N - 3,
                          d = (i == 0) ? 3 : N - 4;
        s.dphi_[i] = sgn * (-3.0 * s.phi_[a] + 4.0 * s.phi_[b] - s.phi_[c]) / (2.0 * h);
        s.d2phi_[i] = (2.0 * s.phi_[a] - 5.0 * s.phi_[b] + 4.0 * s.phi_[c] - s.phi_[d]) / (h * h);
      }
    }
  } else {
    for (std::size_t i = 0; i < N; ++i) {
      const auto jet = symbolic_phi(spec, s.x_[i]);
      s.phi_[i] = jet.value;
      s.dphi_[i] = jet.d1;
      s.d2phi_[i] = jet.d2;
    }
  }

  double phi_scale = 1.0;
  for (double v : s.phi_) phi_scale = std::max(phi_scale, std::abs(v));
  const auto [pmin, pmax] = std::minmax_element(s.phi_.begin(), s.phi_.end());
  s.phi_constant_ = (*pmax - *pmin) <= 8.0 * std::numeric_limits<double>::epsilon() * phi_scale;
  if (spec.m == static_cast<double>(spec.n) && !s.phi_constant_)
    throw ValidationError("space.m", "m = n requires a constant potential");

  s.J_.assign(N, 1.0);
  s.dlogJ_.assign(N, 0.0);
  s.ric_.assign(N, 0.0);
  if (spec.kind == SpaceKind::radial) {
    const double k = static_cast<double>(spec.n - 1);
    const double omega = sphere_area(k);
    for (std::size_t i = 0; i < N; ++i) {
      const auto f = warp_jet(spec.warp, s.x_[i]);
      s.J_[i] = omega * std::pow(f.f, k);
      s.dlogJ_[i] = k * f.d1 / f.f;
      s.ric_[i] = -k * f.d2 / f.f;
    }
  }

  s.w_.resize(N);
  s.mass_.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    s.w_[i] = s.J_[i] * std::exp(-s.phi_[i]);
    if (!(s.w_[i] > 0.0) || !std::isfinite(s.w_[i]))
      throw ValidationError("space.phi", "non-positive or non-finite measure weight at x=" +
                                             std::to_string(s.x_[i]));
    s.mass_[i] = s.w_[i] * s.h_;
  }
  if (!s.periodic()) {
    s.mass_.front() *= 0.5;
    s.mass_.back() *= 0.5;
  }

  const std::size_t cells = s.periodic() ? N : N - 1;
  s.prefix_.assign(cells + 1, 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    const double wl = s.w_[c];
    const double wr = s.w_[(c + 1) % N];
    s.prefix_[c + 1] = s.prefix_[c] + 0.5 * s.h_ * (wl + wr);
  }
  s.total_mass_ = s.prefix_.back();

  double min_mn = std::numeric_limits<double>::infinity();
  double min_L = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < N; ++i) {
    min_mn = std::min(min_mn, ric_mn(s, i));
    min_L = std::min(min_L, ric_L(s, i));
  }
  const auto bound = [](double min_ric) {
    const double raw = std::max(0.0, -min_ric);
    return raw > 0.0 ? std::nextafter(raw, std::numeric_limits<double>::infinity()) : 0.0;
  };
  s.K_ = bound(min_mn);
  s.K_L_ = bound(min_L);
  return s;
}

double ModelSpace::drift(double x) const {
  const double p = fold(x);
  double dphi = 0.0;
  if (spec_.potential.form == PotentialSpec::Form::tabulated) {
    dphi = interpolate(dphi_, p);
  } else {
    dphi = symbolic_phi(spec_, p).d1;
  }
  double dlogJ = 0.0;
  if (spec_.kind == SpaceKind::radial) {
    const auto f = warp_jet(spec_.warp, p);
    dlogJ = static_cast<double>(spec_.n - 1) * f.d1 / f.f;
  }
  return dlogJ - dphi;
}

double ModelSpace::ric_L_at(double x) const {
  const double p = fold(x);
  double d2 = 0.0;
  if (spec_.potential.form == PotentialSpec::Form::tabulated) {
    d2 = interpolate(d2phi_, p);
  } else {
    d2 = symbolic_phi(spec_, p).d2;
  }
  double ric = 0.0;
  if (spec_.kind == SpaceKind::radial) {
    const auto f = warp_jet(spec_.warp, p);
    ric = -static_cast<double>(spec_.n - 1) * f.d2 / f.f;
  }
  return ric + d2;
}

double ModelSpace::fold(double x) const {
  const double L = spec_.length;
  if (periodic()) return spec_.origin + wrap_offset(x - spec_.origin, L);
  double s = wrap_offset(x - spec_.origin, 2.0 * L);
  if (s > L) s = 2.0 * L - s;
  return spec_.origin + s;
}

double ModelSpace::interpolate(std::span<const double> f, double x) const {
  const std::size_t N = size();
  double s = 0.0;
  if (periodic()) {
    s = wrap_offset(x - spec_.origin, spec_.length) / h_;
  } else {
    s = std::clamp((x - spec_.origin) / h_, 0.0, static_cast<double>(N - 1));
  }
  auto i = static_cast<std::size_t>(s);
  if (!periodic() && i >= N - 1) return f[N - 1];
  if (i >= N) i = N - 1;
  const double frac = s - static_cast<double>(i);
  return (1.0 - frac) * f[i] + frac * f[(i + 1) % N];
}

double ModelSpace::cumulative_measure(double x) const {
  const std::size_t N = size();
  if (periodic()) {
    const double L = spec_.length;
    const double periods = std::floor((x - spec_.origin) / L);
    const double s = x - spec_.origin - periods * L;
    auto c = static_cast<std::size_t>(s / h_);
    if (c >= N) c = N - 1;
    const double ds = s - h_ * static_cast<double>(c);
    const double wl = w_[c], wr = w_[(c + 1) % N];
    return periods * total_mass_ + prefix_[c] + wl * ds + 0.5 * (wr - wl) * ds * ds / h_;
  }
  const double s = std::clamp(x - spec_.origin, 0.0, spec_.length);
  auto c = static_cast<std::size_t>(s / h_);
  if (c >= N - 1) return total_mass_;
  const double ds = s - h_ * static_cast<double>(c);
  const double wl = w_[c], wr = w_[c + 1];
  return prefix_[c] + wl * ds + 0.5 * (wr - wl) * ds * ds / h_;
}

double ModelSpace::boundary_mass(std::span<const double> u) const {
  if (periodic()) return 0.0;
  const double band = 3.0 * h_ * (1.0 + 1e-12);
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (x_[i] - lo() <= band || hi() - x_[i] <= band) m += mass_[i] * std::abs(u[i]);
  }
  return m;
}

double ric_L(const ModelSpace& space, std::size_t i) {
  return space.ric_radial(i) + space.d2phi(i);
}

double ric_mn(const ModelSpace& space, std::size_t i) { return ric_mn(space, i, space.m()); }

double ric_mn(const ModelSpace& space, std::size_t i, double m) {
  if (std::isinf(m)) return ric_L(space, i);
  const double gap = m - static_cast<double>(space.n());
  if (gap < 0.0) throw ValidationError("m", "m must satisfy m >= n");
  if (gap == 0.0) {
    if (!space.phi_constant()) throw ValidationError("m", "m = n requires a constant potential");
    return space.ric_radial(i);
  }
  const double g = space.dphi(i);
  return ric_L(space, i) - g * g / gap;
}

double sphere_area(double d) {
  const double k = d + 1.0;
  return 2.0 * std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k);
}

double comparison_volume(double m, double K, double r) {
  if (r < 0.0) throw std::invalid_argument("comparison_volume: negative radius");
  if (m < 1.0) throw std::invalid_argument("comparison_volume: m must be >= 1");
  if (K < 0.0) throw std::invalid_argument("comparison_volume: K must be >= 0");
  const double omega = sphere_area(m - 1.0);
  if (r == 0.0) return 0.0;
  if (m == 1.0) return omega * r;
  if (K == 0.0) return omega * std::pow(r, m) / m;
  const double kappa = std::sqrt(K / (m - 1.0));
  auto integrand = [&](double s) {
    const double ks = kappa * s;
    const double sh = ks < 1e-6 ? s * (1.0 + ks * ks / 6.0) : std::sinh(ks) / kappa;
    return std::pow(sh, m - 1.0);
  };
  using boost::math::quadrature::gauss_kronrod;
  const double integral = gauss_kronrod<double, 31>::integrate(integrand, 0.0, r, 15, 1e-13);
  return omega * integral;
}

double ball_volume(const ModelSpace& space, double center, double r) {
  if (r < 0.0) throw std::invalid_argument("ball_volume: negative radius");
  if (space.periodic()) {
    if (2.0 * r >= space.length()) return space.total_mass();
    return space.cumulative_measure(center + r) - space.cumulative_measure(center - r);
  }
  return space.cumulative_measure(center + r) - space.cumulative_measure(center - r);
}

double displacement(const ModelSpace& space, double x, double y) {
  double d = y - x;
  if (space.periodic()) {
    const double L = space.length();
    d = std::remainder(d, L);
  }
  return d;
}

double geodesic_distance(const ModelSpace& space, double x, double y) {
  return std::abs(displacement(space, x, y));
}

namespace {

bool ball_inside(const ModelSpace& space, double c, double r) {
  if (space.periodic()) return true;
  const double slack = 1e-12 * space.length();
  return c - r >= space.lo() - slack && c + r <= space.hi() + slack;
}

}  // namespace

CheckReport bishop_gromov_ratio_check(const ModelSpace& space, double m, double K, double t,
                                      double y, double tol) {
  if (!(t > 0.0)) throw std::invalid_argument("bishop_gromov_ratio_check: t must be positive");
  CheckReport rep;
  rep.name = "bishop_gromov";
  rep.tolerance = tol;
  const double r = std::sqrt(t);
  if (!ball_inside(space, y, r)) {
    rep.verdict = Verdict::inconclusive;
    rep.note = "ball leaves the truncated domain";
    return rep;
  }
  const double ratio = ball_volume(space, y, r) / ball_volume(space, y, std::sqrt(0.5 * t));
  const double bound = std::pow(2.0, 0.5 * m) * std::exp(std::sqrt((m - 1.0) * K) * t);
  rep.consider(bound - ratio, Witness{t, y, y, ratio, bound});
  rep.constants["ratio"] = ratio;
  rep.constants["bound"] = bound;
  rep.decide();
  return rep;
}

CheckReport relative_volume_check(const ModelSpace& space, double m, double K, double t,
                                  std::size_t stride, double tol) {
  CheckReport rep;
  rep.name = "relative_volume";
  rep.tolerance = tol;
  const double r = std::sqrt(t);
  stride = std::max<std::size_t>(1, stride);
  std::vector<double> vols(space.size(), 0.0);
  std::vector<bool> inside(space.size(), false);
  for (std::size_t i = 0; i < space.size(); i += stride) {
    inside[i] = ball_inside(space, space.x(i), r);
    if (inside[i]) vols[i] = ball_volume(space, space.x(i), r);
  }
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < space.size(); i += stride) {
    for (std::size_t j = 0; j < space.size(); j += stride) {
      if (!inside[i] || !inside[j]) {
        ++skipped;
        continue;
      }
      const double d = geodesic_distance(space, space.x(i), space.x(j));
      const double lhs = vols[j] / vols[i];
      const double rhs =
          std::pow((d + r) / r, m) * std::exp(std::sqrt(std::max(0.0, (m - 1.0) * K)) * d);
      rep.consider(rhs - lhs, Witness{t, space.x(i), space.x(j), lhs, rhs});
    }
  }
  rep.constants["skipped_pairs"] = static_cast<double>(skipped);
  rep.decide();
  return rep;
}

double uniform_volume_floor(const ModelSpace& space, double r0, std::size_t stride) {
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < space.size(); i += std::max<std::size_t>(1, stride))
    floor = std::min(floor, ball_volume(space, space.x(i), r0));
  return floor;
}

}  // namespace wlab
