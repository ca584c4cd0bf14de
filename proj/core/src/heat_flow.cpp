#include "wlab/heat_flow.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace wlab {

double HeatSolution::sup() const {
  double a = 0.0;
  for (const auto& s : states)
    for (double v : s) a = std::max(a, v);
  return a;
}

double default_time_step(const DiscreteOperator& op, double factor) {
  double dmax = 0.0;
  for (double d : op.diag()) dmax = std::max(dmax, std::abs(d));
  const double dt = factor * 0.5 * op.h() * op.h();
  return dmax > 0.0 ? std::min(dt, 2.0 / dmax) : dt;
}

double total_mass(const DiscreteOperator& op, std::span<const double> u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < op.size(); ++i) acc += op.masses()[i] * u[i];
  return acc;
}

HeatSolution solve(const DiscreteOperator& op, std::span<const double> u0, double t_end, double dt,
                   std::size_t store_every) {
  if (!(dt > 0.0)) throw std::invalid_argument("solve: dt must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("solve: t_end must be non-negative");
  if (u0.size() != op.size()) throw std::invalid_argument("solve: initial data size mismatch");
  for (double v : u0)
    if (!(v >= 0.0)) throw std::invalid_argument("solve: initial data must be non-negative");
  store_every = std::max<std::size_t>(1, store_every);

  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  if (steps > 0) dt = t_end / static_cast<double>(steps);

  HeatSolution sol;
  sol.dt = dt;
  sol.initial_mass = total_mass(op, u0);
  if (!(sol.initial_mass > 0.0)) throw std::invalid_argument("solve: initial mass must be positive");

  const auto n = static_cast<Eigen::Index>(op.size());
  const Eigen::SparseMatrix<double> L = op.sparse();
  Eigen::SparseMatrix<double> I(n, n);
  I.setIdentity();
  const Eigen::SparseMatrix<double> lhs = I - 0.5 * dt * L;
  const Eigen::SparseMatrix<double> rhs = I + 0.5 * dt * L;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(lhs);
  // I - dt/2 L is a non-singular M-matrix for dt > 0; failure means corrupt input.
  assert(lu.info() == Eigen::Success);
  if (lu.info() != Eigen::Success) throw std::runtime_error("solve: factorization failed");

  Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(u0.data(), n);
  sol.times.push_back(0.0);
  sol.states.emplace_back(u0.begin(), u0.end());

  for (std::size_t k = 1; k <= steps; ++k) {
    const Eigen::VectorXd b = rhs * u;
    u = lu.solve(b);
    if (k % store_every == 0 || k == steps) {
      sol.times.push_back(static_cast<double>(k) * dt);
      sol.states.emplace_back(u.data(), u.data() + n);
    }
  }
  return sol;
}

HeatKernel::HeatKernel(const DiscreteOperator& op)
    : masses_(op.masses().begin(), op.masses().end()) {
  const std::size_t N = op.size();
  const auto n = static_cast<Eigen::Index>(N);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> root(N);
  for (std::size_t i = 0; i < N; ++i) root[i] = std::sqrt(masses_[i]);
  for (std::size_t f = 0; f < op.face_count(); ++f) {
    const std::size_t a = f, b = (f + 1) % N;
    const double c = op.face_weights()[f] / op.h();
    const double off = -c / (root[a] * root[b]);
    S(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += off;
    S(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) += off;
    S(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) += c / masses_[a];
    S(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) += c / masses_[b];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  if (eig.info() != Eigen::Success) throw std::runtime_error("kernel: eigensolver did not converge");
  lambda_ = eig.eigenvalues().cwiseMax(0.0);
  modes_ = eig.eigenvectors();
  for (Eigen::Index i = 0; i < n; ++i) modes_.row(i) /= root[static_cast<std::size_t>(i)];
}

double HeatKernel::operator()(double t, std::size_t i, std::size_t j) const {
  const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < lambda_.size(); ++k)
    acc += std::exp(-lambda_(k) * t) * modes_(a, k) * modes_(b, k);
  return acc;
}

Eigen::MatrixXd HeatKernel::matrix(double t) const {
  const Eigen::VectorXd decay = (-lambda_ * t).array().exp();
  return modes_ * decay.asDiagonal() * modes_.transpose();
}

std::vector<double> HeatKernel::column(double t, std::size_t j) const {
  const Eigen::VectorXd c =
      (-lambda_ * t).array().exp() * modes_.row(static_cast<Eigen::Index>(j)).transpose().array();
  const Eigen::VectorXd p = modes_ * c;
  return {p.data(), p.data() + p.size()};
}

std::vector<double> HeatKernel::time_derivative_column(double t, std::size_t j) const {
  const Eigen::VectorXd c = -lambda_.array() * (-lambda_ * t).array().exp() *
                            modes_.row(static_cast<Eigen::Index>(j)).transpose().array();
  const Eigen::VectorXd p = modes_ * c;
  return {p.data(), p.data() + p.size()};
}

std::vector<double> HeatKernel::propagate(double t, std::span<const double> f) const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::VectorXd weighted(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    weighted(i) = f[ui] * masses_[ui];
  }
  const Eigen::VectorXd coeff = (-lambda_ * t).array().exp() * (modes_.transpose() * weighted).array();
  const Eigen::VectorXd out = modes_ * coeff;
  return {out.data(), out.data() + n};
}

HeatKernel kernel(const DiscreteOperator& op) { return HeatKernel(op); }

std::vector<double> clamped_log(std::span<const double> p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::log(std::max(p[i], kLogFloor));
  return out;
}

HamiltonJacobiDefect hamilton_jacobi_defect(const ModelSpace& space, const DiscreteOperator& op,
                                            const LogKernelField& field,
                                            std::span<const double> times) {
  const std::size_t N = space.size();
  HamiltonJacobiDefect out;
  std::vector<double> J(N), dJ(N);
  for (double t : times) {
    field(t, J, dJ);
    std::vector<double> Jsafe(J);
    for (double& v : Jsafe)
      if (std::isnan(v)) v = 0.0;
    const auto LJ = op.apply(Jsafe);
    const auto g = gradient(space, Jsafe);
    for (std::size_t i = 0; i < N; ++i) {
      if (!space.periodic() && (i < kWallSkip || i + kWallSkip >= N)) continue;
      const double l = J[(i + N - 1) % N], c = J[i], r = J[(i + 1) % N];
      if (std::isnan(l) || std::isnan(c) || std::isnan(r) || std::isnan(dJ[i])) {
        ++out.excluded;
        continue;
      }
      ++out.samples;
      const double d = std::abs(dJ[i] + LJ[i] + g[i] * g[i]);
      if (d > out.max_defect) {
        out.max_defect = d;
        out.t_at = t;
        out.x_at = space.x(i);
      }
    }
  }
  return out;
}

HamiltonJacobiDefect hamilton_jacobi_defect(const ModelSpace& space, const DiscreteOperator& op,
                                            const HeatKernel& kern, double T, std::size_t y_index,
                                            std::span<const double> times, double dt,
                                            double rel_floor) {
  std::vector<double> kept;
  for (double t : times)
    if (t > 0.0 && T - t >= 10.0 * dt) kept.push_back(t);
  auto field = [&](double t, std::vector<double>& J, std::vector<double>& dJ) {
    const double s = T - t;
    const auto p = kern.column(s, y_index);
    const auto dp = kern.time_derivative_column(s, y_index);
    const double pmax = *std::max_element(p.begin(), p.end());
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] < rel_floor * pmax || p[i] < kLogFloor) {
        J[i] = dJ[i] = std::numeric_limits<double>::quiet_NaN();
      } else {
        J[i] = std::log(p[i]);
        dJ[i] = -dp[i] / p[i];  // d/dt log p_{T-t} = -(d/ds p_s)/p_s
      }
    }
  };
  return hamilton_jacobi_defect(space, op, field, kept);
}

void write_kernel_csv(const std::string& path, const ModelSpace& space, const HeatKernel& kern,
                      double t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const Eigen::MatrixXd P = kern.matrix(t);
  out << std::setprecision(17) << "x\\y";
  for (std::size_t j = 0; j < space.size(); ++j) out << ',' << space.x(j);
  out << '\n';
  for (std::size_t i = 0; i < space.size(); ++i) {
    out << space.x(i);
    for (std::size_t j = 0; j < space.size(); ++j)
      out << ',' << P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    out << '\n';
  }
}

}  // namespace wlab
