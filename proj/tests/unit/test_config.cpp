#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "wlab/config.hpp"

using namespace wlab;

namespace {

const std::string kBase =
    "space.kind = circle\n"
    "space.ladder = 32, 64\n"
    "checks = operator_structure, bochner\n";

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return static_cast<int>(e.line());
  }
  return -1;
}

std::string error_field(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return {};
}

}  // namespace

TEST(Config, ParsesMinimalScenario) {
  const auto c = parse_config(kBase);
  EXPECT_EQ(c.space.kind, SpaceKind::circle);
  ASSERT_EQ(c.ladder.size(), 2u);
  EXPECT_EQ(c.ladder[1], 64u);
  ASSERT_EQ(c.checks.size(), 2u);
  EXPECT_EQ(c.checks[1], "bochner");
}

TEST(Config, CommentsAndTolerances) {
  const auto c = parse_config(kBase + "# a comment\ncheck.bochner.tol = 1.8  # order\n");
  EXPECT_DOUBLE_EQ(c.tolerance("bochner", 1.9), 1.8);
  EXPECT_DOUBLE_EQ(c.tolerance("operator_structure", 1e-12), 1e-12);
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line(kBase + "solver.rho = abc\n"), 4);
  EXPECT_EQ(error_line(kBase + "\nnot.a.key = 1\n"), 5);
  EXPECT_EQ(error_line("space.kind = circle\nspace.kind = line\n"), 2);
}

TEST(Config, RejectsUnknownCheck) {
  EXPECT_EQ(error_field("space.kind = circle\nchecks = no_such_check\n"), "checks");
}

TEST(Config, RejectsBadLadder) {
  EXPECT_EQ(error_field("space.kind = circle\nspace.ladder = 64, 32\nchecks = bochner\n"),
            "space.ladder");
}

TEST(Config, RejectsMBelowN) {
  EXPECT_EQ(error_field("space.kind = radial\nspace.n = 3\nspace.m = 2\nchecks = liouville\n"),
            "space.m");
}

TEST(Config, InfiniteM) {
  const auto c = parse_config(kBase + "space.m = inf\n");
  EXPECT_TRUE(std::isinf(c.space.m));
}

TEST(Config, HashFollowsSource) {
  const auto a = parse_config(kBase);
  EXPECT_EQ(config_hash(a), config_hash(parse_config(kBase)));
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_NE(config_hash(a), config_hash(parse_config(kBase + "output.dir = x\n")));
}

TEST(Config, BundledScenariosLoad) {
  for (const char* name : {"gaussian-space", "circle-cosine", "flat-circle", "euclid-rigidity"})
    EXPECT_NO_THROW(load_config(std::string(WLAB_SCENARIO_DIR) + "/" + name + ".cfg")) << name;
}
