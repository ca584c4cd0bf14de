#include "wlab/witten_operator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include <json.hpp>

namespace wlab {

DiscreteOperator::DiscreteOperator(bool periodic, double h, std::vector<double> masses,
                                   std::vector<double> face_weights)
    : periodic_(periodic), h_(h), mass_(std::move(masses)), face_w_(std::move(face_weights)) {
  const std::size_t N = mass_.size();
  if (N < 3) throw std::invalid_argument("DiscreteOperator: need at least 3 nodes");
  if (face_w_.size() != (periodic_ ? N : N - 1))
    throw std::invalid_argument("DiscreteOperator: face count does not match node count");
  rebuild_bands();
}

void DiscreteOperator::rebuild_bands() {
  const std::size_t N = mass_.size();
  lower_.assign(N, 0.0);
  upper_.assign(N, 0.0);
  diag_.assign(N, 0.0);
  for (std::size_t f = 0; f < face_w_.size(); ++f) {
    const std::size_t a = f;
    const std::size_t b = (f + 1) % N;
    const double c = face_w_[f] / h_;
    upper_[a] = c / mass_[a];
    lower_[b] = c / mass_[b];
  }
  for (std::size_t i = 0; i < N; ++i) diag_[i] = -(lower_[i] + upper_[i]);
}

void DiscreteOperator::apply(std::span<const double> u, std::span<double> out) const {
  const std::size_t N = size();
  assert(u.size() == N && out.size() == N);
  for (std::size_t i = 0; i < N; ++i) {
    const double left = (i > 0) ? u[i - 1] : (periodic_ ? u[N - 1] : 0.0);
    const double right = (i + 1 < N) ? u[i + 1] : (periodic_ ? u[0] : 0.0);
    out[i] = lower_[i] * left + diag_[i] * u[i] + upper_[i] * right;
  }
}

std::vector<double> DiscreteOperator::apply(std::span<const double> u) const {
  std::vector<double> out(size());
  apply(u, out);
  return out;
}

Eigen::MatrixXd DiscreteOperator::dense() const {
  const auto N = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    A(i, i) = diag_[ui];
    if (i > 0 || periodic_) A(i, (i + N - 1) % N) += lower_[ui];
    if (i + 1 < N || periodic_) A(i, (i + 1) % N) += upper_[ui];
  }
  return A;
}

Eigen::SparseMatrix<double> DiscreteOperator::sparse() const {
  const auto N = static_cast<Eigen::Index>(size());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(3 * size());
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    t.emplace_back(i, i, diag_[ui]);
    if (i > 0 || periodic_) t.emplace_back(i, (i + N - 1) % N, lower_[ui]);
    if (i + 1 < N || periodic_) t.emplace_back(i, (i + 1) % N, upper_[ui]);
  }
  Eigen::SparseMatrix<double> A(N, N);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

DiscreteOperator DiscreteOperator::with_cut_faces(std::span<const std::size_t> faces) const {
  DiscreteOperator copy = *this;
  for (std::size_t f : faces) {
    if (f >= copy.face_w_.size()) throw std::out_of_range("with_cut_faces: bad face index");
    copy.face_w_[f] = 0.0;
  }
  copy.rebuild_bands();
  return copy;
}

std::string DiscreteOperator::to_json() const {
  nlohmann::ordered_json j;
  j["periodic"] = periodic_;
  j["h"] = h_;
  j["lower"] = lower_;
  j["diag"] = diag_;
  j["upper"] = upper_;
  j["masses"] = mass_;
  j["face_weights"] = face_w_;
  return j.dump();
}

DiscreteOperator assemble(const ModelSpace& space) {
  const std::size_t N = space.size();
  const std::size_t faces = space.periodic() ? N : N - 1;
  std::vector<double> fw(faces);
  for (std::size_t f = 0; f < faces; ++f)
    fw[f] = std::sqrt(space.weight(f) * space.weight((f + 1) % N));
  return DiscreteOperator(space.periodic(),
                          space.h(),
                          std::vector<double>(space.masses().begin(), space.masses().end()),
                          std::move(fw));
}

std::vector<double> face_gradient(const DiscreteOperator& op, std::span<const double> u) {
  const std::size_t N = op.size();
  std::vector<double> g(op.face_count());
  for (std::size_t f = 0; f < g.size(); ++f) g[f] = (u[(f + 1) % N] - u[f]) / op.h();
  return g;
}

double dirichlet_form(const DiscreteOperator& op, std::span<const double> u,
                      std::span<const double> v) {
  const std::size_t N = op.size();
  const double h = op.h();
  double acc = 0.0;
  for (std::size_t f = 0; f < op.face_count(); ++f) {
    const std::size_t b = (f + 1) % N;
    acc += op.face_weights()[f] * (u[b] - u[f]) * (v[b] - v[f]) / h;
  }
  return acc;
}

double ibp_defect(const DiscreteOperator& op, std::span<const double> u,
                  std::span<const double> v) {
  const auto Lu = op.apply(u);
  double acc = 0.0;
  for (std::size_t i = 0; i < op.size(); ++i) acc += op.masses()[i] * Lu[i] * v[i];
  return std::abs(dirichlet_form(op, u, v) + acc);
}

std::vector<double> gradient(const ModelSpace& space, std::span<const double> u) {
  const std::size_t N = space.size();
  const double h = space.h();
  std::vector<double> g(N);
  for (std::size_t i = 0; i < N; ++i) {
    if (space.periodic() || (i > 0 && i + 1 < N)) {
      g[i] = (u[(i + 1) % N] - u[(i + N - 1) % N]) / (2.0 * h);
    } else if (i == 0) {
      g[i] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    } else {
      g[i] = (3.0 * u[N - 1] - 4.0 * u[N - 2] + u[N - 3]) / (2.0 * h);
    }
  }
  return g;
}

std::vector<double> hessian(const ModelSpace& space, std::span<const double> u) {
  const std::size_t N = space.size();
  const double h2 = space.h() * space.h();
  std::vector<double> H(N);
  for (std::size_t i = 0; i < N; ++i) {
    if (space.periodic() || (i > 0 && i + 1 < N)) {
      H[i] = (u[(i + 1) % N] - 2.0 * u[i] + u[(i + N - 1) % N]) / h2;
    } else if (i == 0) {
      H[i] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h2;
    } else {
      H[i] = (2.0 * u[N - 1] - 5.0 * u[N - 2] + 4.0 * u[N - 3] - u[N - 4]) / h2;
    }
  }
  return H;
}

std::vector<double> bochner_defect(const ModelSpace& space, const DiscreteOperator& op,
                                   std::span<const double> u) {
  const std::size_t N = space.size();
  const auto g = gradient(space, u);
  const auto H = hessian(space, u);
  std::vector<double> g2(N);
  for (std::size_t i = 0; i < N; ++i) g2[i] = g[i] * g[i];
  const auto Lg2 = op.apply(g2);
  const auto Lu = op.apply(u);
  const auto dLu = gradient(space, Lu);
  std::vector<double> defect(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    if (!space.periodic() && (i < kWallSkip || i + kWallSkip >= N)) continue;
    defect[i] = Lg2[i] - 2.0 * g[i] * dLu[i] - 2.0 * H[i] * H[i] - 2.0 * ric_L(space, i) * g2[i];
  }
  return defect;
}

double max_interior_abs(const ModelSpace& space, std::span<const double> v) {
  const std::size_t N = space.size();
  double m = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    if (!space.periodic() && (i < kWallSkip || i + kWallSkip >= N)) continue;
    m = std::max(m, std::abs(v[i]));
  }
  return m;
}

}  // namespace wlab
