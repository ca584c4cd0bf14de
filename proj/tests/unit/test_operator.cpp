#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "wlab/geometry.hpp"
#include "wlab/witten_operator.hpp"

using namespace wlab;

namespace {

ModelSpace weighted_interval(std::size_t n) {
  SpaceSpec s;
  s.kind = SpaceKind::interval;
  s.nodes = n;
  s.length = 3.0;
  s.origin = -1.0;
  s.potential = PotentialSpec::quadratic(0.7, 0.2);
  s.m = 2.0;
  return ModelSpace::build(s);
}

std::vector<double> profile(const ModelSpace& s, double a, double b) {
  std::vector<double> u(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) u[i] = std::sin(a * s.x(i)) + b * s.x(i) * s.x(i);
  return u;
}

}  // namespace

TEST(Operator, SymmetricInWeightedInnerProduct) {
  const auto s = weighted_interval(64);
  const auto op = assemble(s);
  const auto M = op.dense();
  for (std::size_t i = 0; i < op.size(); ++i)
    for (std::size_t j = 0; j < op.size(); ++j)
      EXPECT_NEAR(op.masses()[i] * M(i, j), op.masses()[j] * M(j, i), 1e-10);
}

TEST(Operator, AnnihilatesConstants) {
  const auto s = weighted_interval(64);
  const auto op = assemble(s);
  const auto Lu = op.apply(std::vector<double>(op.size(), 3.0));
  for (double v : Lu) EXPECT_NEAR(v, 0.0, 1e-10);
}

TEST(Operator, IntegrationByParts) {
  const auto s = weighted_interval(128);
  const auto op = assemble(s);
  EXPECT_LT(ibp_defect(op, profile(s, 1.3, 0.2), profile(s, 2.1, -0.4)), 1e-12);
}

TEST(Operator, ApplyMatchesDense) {
  const auto s = weighted_interval(48);
  const auto op = assemble(s);
  const auto u = profile(s, 0.9, 0.1);
  const auto Lu = op.apply(u);
  const Eigen::VectorXd ref = op.dense() * Eigen::Map<const Eigen::VectorXd>(u.data(), u.size());
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(Lu[i], ref(i), 1e-9 * (1 + std::abs(ref(i))));
}

TEST(Operator, PeriodicFaceCount) {
  SpaceSpec spec;
  spec.nodes = 32;
  const auto op = assemble(ModelSpace::build(spec));
  EXPECT_TRUE(op.periodic());
  EXPECT_EQ(op.face_count(), 32u);
  EXPECT_EQ(assemble(weighted_interval(32)).face_count(), 31u);
}

TEST(Operator, CutFacesDisconnect) {
  SpaceSpec spec;
  spec.nodes = 32;
  const auto op = assemble(ModelSpace::build(spec));
  const std::vector<std::size_t> cut{3, 19};
  const auto split = op.with_cut_faces(cut);
  // The indicator of one component is now harmonic.
  std::vector<double> u(32, 0.0);
  for (std::size_t i = 4; i <= 19; ++i) u[i] = 1.0;
  for (double v : split.apply(u)) EXPECT_NEAR(v, 0.0, 1e-12);
  EXPECT_GT(std::abs(op.apply(u)[4]), 1.0);
}

TEST(Operator, DirichletFormIsNonNegative) {
  const auto s = weighted_interval(64);
  const auto op = assemble(s);
  const auto u = profile(s, 2.0, 0.3);
  EXPECT_GT(dirichlet_form(op, u, u), 0.0);
}
