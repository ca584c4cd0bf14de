#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wlab/check_report.hpp"
#include "wlab/config.hpp"

namespace wlab {

const char* version();

struct SummaryRow {
  std::string check;
  std::size_t level = 0;
  CheckReport report;
};

struct RunArtifact {
  std::string config_hash;
  std::string output_dir;
  std::vector<SummaryRow> rows;
  /// Paths written, relative to output_dir, in write order.
  std::vector<std::string> files;

  /// Rows of the finest level, one per check.
  std::vector<const SummaryRow*> finest() const;
  /// True iff every non-informational check passes at the finest level.
  bool passed() const;
};

/// Runs every configured check over the ladder and writes the artifacts into
/// `output_dir` (created if needed). Checks that throw are reported as
/// failures and the run continues.
RunArtifact run(const ScenarioConfig& config, const std::string& output_dir);

/// Output directory of a config: output.dir, below $WLAB_OUTPUT_ROOT when set.
std::string resolve_output_dir(const ScenarioConfig& config);

/// Fixed-schema CSV of the rows; identical rows give identical bytes.
std::string summary_csv(const std::vector<SummaryRow>& rows);

/// One line per registered check: name, anchor and statement.
std::string list_checks_text();

}  // namespace wlab
