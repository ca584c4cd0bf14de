#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wlab/geometry.hpp"

namespace wlab {

/// Validation failure in a scenario file; `line` is 0 when the field is missing.
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& field, std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct SolverSpec {
  double dt_factor = 1.0;
  double t0 = 0.05;
  double rho = 1.2;
  std::size_t t_count = 24;
  /// Horizon of the Crank-Nicolson run used by the Harnack checks.
  double t_end = 2.0;
  std::size_t store_every = 4;
  /// Initial data: floor + exp(-(x - center)^2 / (2 width^2)).
  double init_center = 0.0;
  double init_width = 0.3;
  double init_floor = 0.0;
};

struct KernelSpec {
  /// Source point y (snapped to the nearest node).
  double source = 0.0;
  double eps = 0.1;
  /// Pairs with d > spread * sqrt(t) are not sampled by the fits.
  double spread = 5.0;
  /// Nodes closer than this to a reflecting wall are left out of the fits.
  double wall_margin = 0.0;
  std::vector<double> times{0.05, 0.1, 0.2, 0.5, 1.0};
  /// Sources and targets are every (nodes / samples)-th node.
  std::size_t samples = 32;
  /// "spectral", or "euclidean" for the closed-form flat kernel in the
  /// gradient-estimate fits.
  std::string model = "spectral";
};

struct McSpec {
  std::size_t paths = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 20240611;
  double T = 1.0;
  double x0 = 0.0;
  double y = 0.0;
};

struct LsiSpec {
  std::vector<double> tau{0.1, 0.25, 1.0};
  std::vector<double> scan{0.01, 0.1, 1.0, 10.0};
};

struct ScenarioConfig {
  std::string name = "scenario";
  SpaceSpec space;
  std::vector<std::size_t> ladder{128, 256, 512};
  SolverSpec solver;
  KernelSpec kernel;
  McSpec mc;
  LsiSpec lsi;
  std::vector<std::string> checks;
  std::map<std::string, double> tolerances;
  std::string output_dir = "out";
  /// Raw text, hashed into the run stamp.
  std::string source;
  /// Line of each key in the source, for error messages.
  std::map<std::string, std::size_t> lines;

  /// Tolerance of `check`, or `fallback` when not overridden.
  double tolerance(const std::string& check, double fallback) const;
  std::size_t line_of(const std::string& key) const;
};

/// Parses flat `dotted.key = value` text. `#` starts a comment. Unknown keys,
/// malformed values, unknown checks and inconsistent settings raise ConfigError.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// 64-bit FNV-1a of the raw config text, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

}  // namespace wlab
