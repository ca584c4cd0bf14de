#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "wlab/geometry.hpp"
#include "wlab/heat_flow.hpp"
#include "wlab/witten_operator.hpp"

using namespace wlab;

namespace {

ModelSpace gaussian_line(std::size_t n) {
  SpaceSpec s;
  s.kind = SpaceKind::line;
  s.nodes = n;
  s.length = 12.0;
  s.origin = -6.0;
  s.potential = PotentialSpec::quadratic(1.0, 0.5 * std::log(2.0 * M_PI));
  s.m = 40.0;
  return ModelSpace::build(s);
}

}  // namespace

TEST(HeatFlow, CrankNicolsonConservesMass) {
  SpaceSpec spec;
  spec.nodes = 128;
  spec.potential = PotentialSpec::cosine(0.3);
  spec.m = 2.0;
  const auto s = ModelSpace::build(spec);
  const auto op = assemble(s);
  std::vector<double> u0(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) u0[i] = std::exp(-std::pow(s.x(i) - 2.0, 2));
  const auto sol = solve(op, u0, 1.0, default_time_step(op), 5);
  const double m0 = total_mass(op, u0);
  for (const auto& u : sol.states) EXPECT_NEAR(total_mass(op, u), m0, 1e-12 * m0);
  EXPECT_DOUBLE_EQ(sol.times.front(), 0.0);
  EXPECT_NEAR(sol.times.back(), 1.0, 1e-12);
}

TEST(HeatFlow, KernelIsSymmetricAndStochastic) {
  const auto s = gaussian_line(128);
  const HeatKernel kern(assemble(s));
  const auto P = kern.matrix(0.3);
  for (std::size_t i = 0; i < s.size(); i += 7) {
    double row = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      row += P(i, j) * s.mass(j);
      EXPECT_NEAR(P(i, j), P(j, i), 1e-10 * P.maxCoeff());
    }
    EXPECT_NEAR(row, 1.0, 1e-10);
  }
}

TEST(HeatFlow, OrnsteinUhlenbeckPeak) {
  const auto s = gaussian_line(513);
  const HeatKernel kern(assemble(s));
  const std::size_t c = 256;
  ASSERT_NEAR(s.x(c), 0.0, 1e-12);
  EXPECT_NEAR(kern(1.0, c, c), 1.0 / std::sqrt(1.0 - std::exp(-2.0)), 1e-3);
}

TEST(HeatFlow, PropagateMatchesColumn) {
  const auto s = gaussian_line(64);
  const HeatKernel kern(assemble(s));
  std::vector<double> delta(s.size(), 0.0);
  delta[20] = 1.0 / s.mass(20);
  const auto a = kern.propagate(0.2, delta);
  const auto b = kern.column(0.2, 20);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-10 * (1 + b[i]));
}

TEST(HeatFlow, SolverAgreesWithKernel) {
  const auto s = gaussian_line(128);
  const auto op = assemble(s);
  const HeatKernel kern(op);
  std::vector<double> u0(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) u0[i] = std::exp(-std::pow(s.x(i) - 0.5, 2) / 0.2);
  const auto sol = solve(op, u0, 0.5, 1e-3);
  const auto ref = kern.propagate(0.5, u0);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(sol.states.back()[i], ref[i], 1e-5);
}

TEST(HeatFlow, ClampedLogStaysFinite) {
  const std::vector<double> p{1.0, 0.0, -1e-20, 1e-5};
  for (double v : clamped_log(p)) EXPECT_TRUE(std::isfinite(v));
}
