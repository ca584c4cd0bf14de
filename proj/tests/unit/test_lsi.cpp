#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "wlab/geometry.hpp"
#include "wlab/lsi.hpp"
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

}  // namespace

TEST(Lsi, WOfVRequiresNormalization) {
  const auto s = flat_line(128);
  const auto op = assemble(s);
  std::vector<double> v(s.size(), 1.0);
  EXPECT_THROW(w_of_v(op, v, 1.0, 1.0), std::invalid_argument);
  const auto n = normalized(op, v);
  EXPECT_NEAR(l2_norm(op, n), 1.0, 1e-14);
  EXPECT_NO_THROW(w_of_v(op, n, 1.0, 1.0));
}

TEST(Lsi, GradientMatchesFiniteDifferences) {
  const auto s = flat_line(256);
  const auto op = assemble(s);
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v[i] = std::exp(-std::pow(s.x(i) - 1.0, 2) / 6.0) + 0.01;
  EXPECT_LT(w_gradient_fd_error(op, normalized(op, v), 0.5, 1.0), 1e-6);
}

TEST(Lsi, GaussianTrialGivesNearZero) {
  const auto s = flat_line(512);
  const auto op = assemble(s);
  const double tau = 0.5;
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v[i] = std::exp(-s.x(i) * s.x(i) / (8.0 * tau));
  EXPECT_NEAR(w_of_v(op, normalized(op, v), tau, 1.0), 0.0, 1e-3);
}

TEST(Lsi, MinimizerIsGaussianOnFlatLine) {
  const auto s = flat_line(256);
  const auto op = assemble(s);
  const auto est = minimize_mu(s, op, 0.25, 1.0);
  EXPECT_TRUE(est.converged);
  EXPECT_NEAR(est.mu, 0.0, 1e-2);
  EXPECT_LT(gaussian_l2_distance(s, est.minimizer, 0.25), 1e-2);
}

TEST(Lsi, TrialsStayAboveMinimum) {
  const auto s = flat_line(256);
  const auto op = assemble(s);
  const auto est = minimize_mu(s, op, 0.25, 1.0);
  const auto trials = trial_battery(s, op);
  EXPECT_GE(trials.size(), 4u);
  EXPECT_EQ(lsi_check(s, op, trials, 0.25, 1.0, est).verdict, Verdict::pass);
}
