#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wlab {

enum class Verdict { pass, fail, inconclusive };

const char* verdict_name(Verdict v);

/// Location and the two sides of an inequality at its worst sample.
struct Witness {
  double t = std::numeric_limits<double>::quiet_NaN();
  double x = std::numeric_limits<double>::quiet_NaN();
  double y = std::numeric_limits<double>::quiet_NaN();
  double lhs = std::numeric_limits<double>::quiet_NaN();
  double rhs = std::numeric_limits<double>::quiet_NaN();
};

/// Outcome of one inequality or identity check.
///
/// `margin` is signed: a non-negative margin means the inequality holds at
/// every evaluated sample. Fitted constants (C*, C1, C2, ...) are reported in
/// `constants`; `refinement` holds the per-grid-level margins or constants
/// that a refinement-stability verdict was based on.
struct CheckReport {
  std::string name;
  double margin = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  Witness witness;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  std::vector<double> refinement;
  std::map<std::string, double> constants;
  std::optional<double> ci_halfwidth;
  double boundary_mass = 0.0;
  bool informational = false;
  Verdict verdict = Verdict::inconclusive;
  std::string note;

  /// Records one sample; keeps the smallest margin and its witness.
  void consider(double sample_margin, const Witness& w);

  /// Pass iff margin >= -tolerance and fewer than 5% of samples were
  /// excluded. Boundary-localization mass above 1e-6 makes the check
  /// inconclusive regardless of the margin.
  Verdict decide();

  double excluded_fraction() const;
};

/// Boundary-localization threshold shared by all checks on truncated spaces.
inline constexpr double kBoundaryMassLimit = 1e-6;

std::string to_json_string(const CheckReport& report);

}  // namespace wlab
