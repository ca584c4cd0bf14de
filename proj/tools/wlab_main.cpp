#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wlab/check_report.hpp"
#include "wlab/config.hpp"
#include "wlab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"wlab: numerical checks for weighted heat flows"};
  app.require_subcommand(1);

  std::string config_path;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run the checks of a scenario config");
  run->add_option("config", config_path, "scenario config file")->required();
  run->add_flag("-q,--quiet", quiet, "print only the output directory");
  auto* list = app.add_subcommand("list-checks", "print every check with its anchor");
  auto* ver = app.add_subcommand("version", "print the version");

  CLI11_PARSE(app, argc, argv);

  if (*ver) {
    std::cout << "wlab " << wlab::version() << '\n';
    return 0;
  }
  if (*list) {
    std::cout << wlab::list_checks_text();
    return 0;
  }

  wlab::ScenarioConfig cfg;
  try {
    cfg = wlab::load_config(config_path);
  } catch (const wlab::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  const std::string out = wlab::resolve_output_dir(cfg);
  wlab::RunArtifact art;
  try {
    art = wlab::run(cfg, out);
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return 3;
  }

  if (quiet) {
    std::cout << art.output_dir << '\n';
  } else {
    for (const auto* row : art.finest()) {
      const auto& r = row->report;
      std::printf("%-26s %-12s margin=% .3e tol=%.1e%s\n", row->check.c_str(),
                  wlab::verdict_name(r.verdict), r.margin, r.tolerance,
                  r.informational ? "  (info)" : "");
    }
    std::printf("%s -> %s\n", art.passed() ? "PASS" : "FAIL", art.output_dir.c_str());
  }
  return art.passed() ? 0 : 1;
}
