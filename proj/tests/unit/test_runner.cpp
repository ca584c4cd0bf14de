#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "wlab/config.hpp"
#include "wlab/registry.hpp"
#include "wlab/runner.hpp"

using namespace wlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmall =
    "scenario.name = small\n"
    "space.kind = circle\n"
    "space.ladder = 32, 64\n"
    "space.phi = cosine\n"
    "space.phi.scale = 0.1\n"
    "space.m = 3\n"
    "checks = operator_structure, bochner, stochastic_completeness, hm_identity, liouville\n"
    "check.bochner.tol = 1.5\n";

}  // namespace

TEST(Runner, ListChecksHasAnchors) {
  const auto text = list_checks_text();
  EXPECT_NE(text.find("harnack_hamilton → Eq. (3)"), std::string::npos);
  EXPECT_NE(text.find("w_dissipation → Eq. (4)"), std::string::npos);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  EXPECT_EQ(lines, check_registry().size());
}

TEST(Runner, RegistryLookup) {
  ASSERT_NE(find_check("bochner"), nullptr);
  EXPECT_EQ(find_check("bochner")->stage, CheckStage::refinement);
  EXPECT_EQ(find_check("nope"), nullptr);
}

TEST(Runner, SmallRunIsReproducible) {
  const auto cfg = parse_config(kSmall);
  const auto root = fs::temp_directory_path() / "wlab_runner_test";
  fs::remove_all(root);
  const auto a = run(cfg, (root / "a").string());
  const auto b = run(cfg, (root / "b").string());
  EXPECT_TRUE(a.passed());
  ASSERT_EQ(a.finest().size(), 5u);
  const auto csv = slurp(root / "a" / "summary.csv");
  EXPECT_EQ(csv.rfind("check,level,margin,tolerance,verdict,witness_t,witness_x,witness_y,ci_halfwidth\n", 0),
            0u);
  EXPECT_EQ(csv, slurp(root / "b" / "summary.csv"));
  EXPECT_EQ(csv, summary_csv(a.rows));
  EXPECT_TRUE(fs::exists(root / "a" / "report.md"));
  EXPECT_TRUE(fs::exists(root / "a" / "run.json"));
  fs::remove_all(root);
}

TEST(Runner, OutputRootOverride) {
  const auto cfg = parse_config(std::string(kSmall) + "output.dir = sub/dir\n");
  ::unsetenv("WLAB_OUTPUT_ROOT");
  EXPECT_EQ(resolve_output_dir(cfg), "sub/dir");
  ::setenv("WLAB_OUTPUT_ROOT", "/tmp/root", 1);
  EXPECT_EQ(fs::path(resolve_output_dir(cfg)), fs::path("/tmp/root/sub/dir"));
  ::unsetenv("WLAB_OUTPUT_ROOT");
}
