#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "wlab/entropy.hpp"
#include "wlab/geometry.hpp"
#include "wlab/heat_flow.hpp"
#include "wlab/witten_operator.hpp"

using namespace wlab;

namespace {

ModelSpace flat_line(std::size_t n) {
  SpaceSpec s;
  s.kind = SpaceKind::line;
  s.nodes = n;
  s.length = 24.0;
  s.origin = -12.0;
  return ModelSpace::build(s);
}

std::vector<double> heat_gaussian(const ModelSpace& s, double t) {
  std::vector<double> u(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    u[i] = std::exp(-s.x(i) * s.x(i) / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
  return u;
}

}  // namespace

TEST(Entropy, GeometricTimes) {
  const auto t = geometric_times(0.1, 2.0, 4);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_DOUBLE_EQ(t[0], 0.1);
  EXPECT_NEAR(t[3], 0.8, 1e-15);
}

TEST(Entropy, WVanishesOnEuclideanGaussian) {
  const auto s = flat_line(1024);
  for (double t : {0.5, 1.0, 2.0}) EXPECT_NEAR(w_entropy(s, heat_gaussian(s, t), t, 1.0), 0.0, 1e-4);
}

TEST(Entropy, BoltzmannEntropyOfGaussian) {
  const auto s = flat_line(1024);
  const double t = 1.0;
  // -int u log u for N(0, 2t) is (1/2) log(4 pi e t).
  EXPECT_NEAR(boltzmann_entropy(s, heat_gaussian(s, t)), 0.5 * std::log(4.0 * M_PI * M_E * t), 1e-4);
}

TEST(Entropy, FisherMatchesEntropyDerivative) {
  const auto s = flat_line(1024);
  const auto op = assemble(s);
  const auto u = heat_gaussian(s, 1.0);
  EXPECT_NEAR(entropy_derivatives(s, op, u).dH, fisher_information(s, u), 1e-4);
  // Fisher information of N(0, 2) is 1/2.
  EXPECT_NEAR(fisher_information(s, u), 0.5, 1e-4);
}

TEST(Entropy, HmResidualIsRoundOff) {
  SpaceSpec spec;
  spec.nodes = 128;
  spec.potential = PotentialSpec::cosine(0.1);
  spec.m = 3.0;
  const auto s = ModelSpace::build(spec);
  const auto op = assemble(s);
  const HeatKernel kern(op);
  const auto times = geometric_times(0.05, 1.5, 6);
  const auto tr = h_m_trace(s, op, kern, 0, 3.0, times);
  ASSERT_EQ(tr.rows.size(), times.size());
  for (const auto& r : tr.rows)
    EXPECT_LE(std::abs(r.residual_hm(3.0)), 1e-12 * (1.0 + std::abs(r.d2Hm)));
}

TEST(Entropy, PositiveSliceFloorsRoundOff) {
  const std::vector<double> p{1.0, 1e-20, -1e-18};
  const auto q = positive_slice(p, 1e-15);
  EXPECT_DOUBLE_EQ(q[0], 1.0);
  EXPECT_DOUBLE_EQ(q[1], 1e-15);
  EXPECT_DOUBLE_EQ(q[2], 1e-15);
}
