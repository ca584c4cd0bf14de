#pragma once

#include <span>
#include <string_view>

namespace wlab {

enum class CheckStage {
  level,       // evaluated on every ladder level
  refinement,  // per-level values combined into a convergence verdict at the finest level
  finest,      // evaluated once, on the finest level
};

struct CheckInfo {
  std::string_view name;
  std::string_view anchor;
  std::string_view statement;
  CheckStage stage;
};

/// Every check the runner knows, in report order.
std::span<const CheckInfo> check_registry();
const CheckInfo* find_check(std::string_view name);

}  // namespace wlab
