#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "wlab/geometry.hpp"
#include "wlab/heat_flow.hpp"
#include "wlab/stochastic.hpp"
#include "wlab/witten_operator.hpp"

using namespace wlab;

namespace {

ModelSpace flat_circle() {
  SpaceSpec spec;
  spec.nodes = 128;
  return ModelSpace::build(spec);
}

SimulationOptions small_run() {
  SimulationOptions o;
  o.T = 0.5;
  o.dt = 1e-2;
  o.paths = 2000;
  o.seed = 99;
  return o;
}

}  // namespace

TEST(Stochastic, RejectsBadOptions) {
  const auto s = flat_circle();
  auto o = small_run();
  o.paths = 10;
  EXPECT_THROW(simulate(s, 1.0, o), ValidationError);
  o = small_run();
  o.dt = 0.0;
  EXPECT_THROW(simulate(s, 1.0, o), ValidationError);
  o = small_run();
  o.dt = 0.4;
  EXPECT_THROW(simulate(s, 1.0, o), ValidationError);
}

TEST(Stochastic, SeedDeterminesPaths) {
  const auto s = flat_circle();
  const auto a = simulate(s, 1.0, small_run());
  const auto b = simulate(s, 1.0, small_run());
  EXPECT_EQ(a.X, b.X);
  auto o = small_run();
  o.seed = 100;
  EXPECT_NE(simulate(s, 1.0, o).X, a.X);
}

TEST(Stochastic, FlatVarianceIsTwoT) {
  const auto s = flat_circle();
  auto o = small_run();
  o.paths = 20000;
  const auto e = simulate(s, 1.0, o);
  ASSERT_EQ(e.unwrapped.size(), o.paths);
  double v = 0.0;
  for (double d : e.unwrapped) v += d * d;
  EXPECT_NEAR(v / o.paths, 2.0 * o.T, 0.05);
}

TEST(Stochastic, BinaryRoundTrip) {
  const auto s = flat_circle();
  auto o = small_run();
  o.record_every = 10;
  const auto e = simulate(s, 1.0, o);
  const auto path = (std::filesystem::temp_directory_path() / "wlab_paths_test.bin").string();
  e.write_binary(path);
  const auto r = DiffusionEnsemble::read_binary(path);
  std::remove(path.c_str());
  EXPECT_EQ(r.paths, e.paths);
  EXPECT_EQ(r.time_count(), e.time_count());
  EXPECT_DOUBLE_EQ(r.dt, e.dt);
  EXPECT_EQ(r.X, e.X);
}

TEST(Stochastic, McMeanAndError) {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const auto m = mc_mean(x);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_NEAR(m.halfwidth(), 1.96 * m.se, 1e-15);
}

TEST(Stochastic, BridgeEndsAtTarget) {
  const auto s = flat_circle();
  const HeatKernel kern(assemble(s));
  auto o = small_run();
  o.dt = 1e-3;
  const auto e = simulate_bridge(s, kern, 1.0, 64, o);
  for (std::size_t p = 0; p < e.paths; p += 97) EXPECT_DOUBLE_EQ(e.at(p, e.time_count() - 1), s.x(64));
}

TEST(Stochastic, LawMatchesKernelOnCircle) {
  const auto s = flat_circle();
  const HeatKernel kern(assemble(s));
  auto o = small_run();
  o.paths = 10000;
  o.dt = 1e-3;
  const auto e = simulate(s, s.x(20), o);
  EXPECT_EQ(law_vs_kernel(s, kern, 20, e).verdict, Verdict::pass);
}

TEST(Stochastic, FlatBridgeMidpointLaw) {
  SpaceSpec spec;
  spec.kind = SpaceKind::line;
  spec.nodes = 512;
  spec.length = 24.0;
  spec.origin = -12.0;
  const auto s = ModelSpace::build(spec);
  const HeatKernel kern(assemble(s));
  SimulationOptions o;
  o.T = 1.0;
  o.dt = 1e-3;
  o.paths = 10000;
  o.seed = 5;
  o.record_until = 0.5;
  const std::size_t y = 277;
  const double x0 = -1.0;
  const auto e = simulate_bridge(s, kern, x0, y, o);
  const std::size_t j = e.time_index(0.5);
  std::vector<double> mid(e.paths);
  for (std::size_t p = 0; p < e.paths; ++p) mid[p] = e.at(p, j);
  const auto m = mc_mean(mid);
  double var = 0.0;
  for (double v : mid) var += (v - m.mean) * (v - m.mean);
  var /= static_cast<double>(e.paths - 1);
  // Brownian bridge with generator d^2/dx^2: variance 2 s (T - s)/T.
  EXPECT_NEAR(m.mean, 0.5 * (x0 + s.x(y)), 4.0 * m.se);
  EXPECT_NEAR(var, 0.5, 0.03);
}
