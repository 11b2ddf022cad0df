#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

#include "macnn/error.hpp"

namespace macnn {

inline constexpr int kNumModes = 35;

/// One of the 35 luma intra prediction modes: 0 planar, 1 DC, 2..34 angular.
class IntraMode {
 public:
  constexpr IntraMode() = default;
  constexpr explicit IntraMode(int v) : v_(static_cast<std::uint8_t>(v)) {
    if (v < 0 || v >= kNumModes) throw FormatError("intra mode out of range: " + std::to_string(v));
  }

  constexpr int value() const { return v_; }
  constexpr bool is_angular() const { return v_ >= 2; }

  friend constexpr auto operator<=>(IntraMode, IntraMode) = default;

 private:
  std::uint8_t v_ = 0;
};

inline constexpr IntraMode kPlanar{0};
inline constexpr IntraMode kDc{1};
inline constexpr IntraMode kHorizontal{10};
inline constexpr IntraMode kVertical{26};

/// Three pairwise distinct most probable modes.
using MpmList = std::array<IntraMode, 3>;

}  // namespace macnn
