#include "wlab/check_report.hpp"

#include <cmath>

#include <json.hpp>

namespace wlab {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

void CheckReport::consider(double sample_margin, const Witness& w) {
  ++evaluated;
  if (sample_margin < margin) {
    margin = sample_margin;
    witness = w;
  }
}

double CheckReport::excluded_fraction() const {
  const std::size_t total = evaluated + excluded;
  return total == 0 ? 0.0 : static_cast<double>(excluded) / static_cast<double>(total);
}

Verdict CheckReport::decide() {
  if (boundary_mass > kBoundaryMassLimit) {
    verdict = Verdict::inconclusive;
  } else if (excluded_fraction() >= 0.05) {
    verdict = Verdict::inconclusive;
  } else if (std::isnan(margin)) {
    verdict = Verdict::fail;
  } else {
    verdict = margin >= -tolerance ? Verdict::pass : Verdict::fail;
  }
  return verdict;
}

namespace {

nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string to_json_string(const CheckReport& r) {
  nlohmann::ordered_json j;
  j["check"] = r.name;
  j["verdict"] = verdict_name(r.verdict);
  j["informational"] = r.informational;
  j["margin"] = number_or_null(r.margin);
  j["tolerance"] = r.tolerance;
  j["evaluated"] = r.evaluated;
  j["excluded"] = r.excluded;
  j["boundary_mass"] = r.boundary_mass;
  j["witness"] = {{"t", number_or_null(r.witness.t)},
                  {"x", number_or_null(r.witness.x)},
                  {"y", number_or_null(r.witness.y)},
                  {"lhs", number_or_null(r.witness.lhs)},
                  {"rhs", number_or_null(r.witness.rhs)}};
  nlohmann::ordered_json trend = nlohmann::ordered_json::array();
  for (double v : r.refinement) trend.push_back(number_or_null(v));
  j["refinement"] = trend;
  nlohmann::ordered_json constants = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.constants) constants[k] = number_or_null(v);
  j["constants"] = constants;
  j["ci_halfwidth"] = r.ci_halfwidth ? number_or_null(*r.ci_halfwidth) : nullptr;
  j["note"] = r.note;
  return j.dump(2);
}

}  // namespace wlab
