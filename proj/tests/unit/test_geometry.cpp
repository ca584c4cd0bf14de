#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wlab/geometry.hpp"

using namespace wlab;

namespace {

SpaceSpec cosine_circle(std::size_t n) {
  SpaceSpec s;
  s.kind = SpaceKind::circle;
  s.nodes = n;
  s.potential = PotentialSpec::cosine(0.1);
  s.m = 3.0;
  return s;
}

}  // namespace

TEST(Geometry, CosineCircleCurvatureBound) {
  const auto s = ModelSpace::build(cosine_circle(256));
  EXPECT_NEAR(s.K_L(), 0.1, 1e-12);
  EXPECT_EQ(s.size(), 256u);
  EXPECT_NEAR(s.h(), 2.0 * std::numbers::pi / 256.0, 1e-15);
}

TEST(Geometry, MassesSumToTotal) {
  const auto s = ModelSpace::build(cosine_circle(128));
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) sum += s.mass(i);
  EXPECT_NEAR(sum, s.total_mass(), 1e-12 * s.total_mass());
}

TEST(Geometry, RejectsMBelowN) {
  SpaceSpec s;
  s.kind = SpaceKind::radial;
  s.n = 3;
  s.m = 2.0;
  EXPECT_THROW(ModelSpace::build(s), ValidationError);
}

TEST(Geometry, RejectsTinyGrid) {
  auto s = cosine_circle(4);
  EXPECT_THROW(ModelSpace::build(s), ValidationError);
}

TEST(Geometry, CircleDistanceWraps) {
  const auto s = ModelSpace::build(cosine_circle(64));
  const double L = 2.0 * std::numbers::pi;
  EXPECT_NEAR(geodesic_distance(s, 0.1, L - 0.1), 0.2, 1e-12);
  EXPECT_NEAR(geodesic_distance(s, 1.0, 2.5), 1.5, 1e-12);
}

TEST(Geometry, FlatComparisonVolumeIsEuclidean) {
  // m = 1, K = 0: the ball of radius r has length 2r.
  EXPECT_NEAR(comparison_volume(1.0, 0.0, 0.7), 1.4, 1e-12);
  // m = 3: (4/3) pi r^3.
  EXPECT_NEAR(comparison_volume(3.0, 0.0, 0.5), 4.0 / 3.0 * std::numbers::pi * 0.125, 1e-12);
}

TEST(Geometry, ComparisonVolumeGrowsWithCurvatureBound) {
  EXPECT_GT(comparison_volume(3.0, 1.0, 1.0), comparison_volume(3.0, 0.0, 1.0));
}

TEST(Geometry, BallVolumeOnFlatLine) {
  SpaceSpec spec;
  spec.kind = SpaceKind::line;
  spec.nodes = 401;
  spec.length = 4.0;
  spec.origin = -2.0;
  const auto s = ModelSpace::build(spec);
  EXPECT_NEAR(ball_volume(s, 0.0, 0.5), 1.0, 1e-9);
}
