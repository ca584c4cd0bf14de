#pragma once

#include <array>
#include <cstdint>

namespace wlab {

/// Philox4x32-10 counter-based generator. The stream of a path is fully
/// determined by (seed, path index), so paths can be simulated in any order.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  /// Ten rounds applied to the 128-bit counter (path, step).
  Block operator()(std::uint64_t path, std::uint64_t step) const;

 private:
  std::array<std::uint32_t, 2> key_;
};

/// Uniform double in (0, 1) from 64 random bits; never returns 0.
double to_open_unit(std::uint32_t hi, std::uint32_t lo);

/// Standard normal for draw `step` of `path` (Box-Muller on one Philox block).
double normal_draw(const Philox4x32& gen, std::uint64_t path, std::uint64_t step);

}  // namespace wlab
