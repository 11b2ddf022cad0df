#pragma once

#include <array>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "macnn/error.hpp"
#include "macnn/image.hpp"
#include "macnn/mode.hpp"

namespace macnn::intra {

/// N x N samples, row-major.
using Block = std::vector<std::uint8_t>;

/// Neighbouring reference samples of one block. `top` has 2N+1 entries with
/// the above-left corner first; `left` has 2N entries from the top down.
struct References {
  int n = 0;
  std::vector<int> top;
  std::vector<int> left;

  /// p[x][-1] for x in [-1, 2N).
  int above(int x) const { return top[static_cast<std::size_t>(x + 1)]; }
  /// p[-1][y] for y in [-1, 2N).
  int side(int y) const { return y < 0 ? top[0] : left[static_cast<std::size_t>(y)]; }

  friend bool operator==(const References&, const References&) = default;
};

/// A reconstructed sample is usable when it is inside the picture and its
/// block precedes the current one in raster order.
inline bool sample_available(const Plane& recon, int n, int block_x, int block_y, int x, int y) {
  if (x < 0 || y < 0 || x >= recon.width || y >= recon.height) return false;
  const int by = y / n, bx = x / n;
  const int cy = block_y / n, cx = block_x / n;
  return by < cy || (by == cy && bx < cx);
}

/// Gathers references for the block at (block_x, block_y) and substitutes the
/// unavailable ones: 128 everywhere if nothing is available, otherwise each gap
/// copies its predecessor in the scan bottom-left -> corner -> top-right.
inline References build_references(const Plane& recon, int n, int block_x, int block_y) {
  const int count = 4 * n + 1;
  // Scan order: p[-1][2N-1] .. p[-1][0], p[-1][-1], p[0][-1] .. p[2N-1][-1].
  auto coord = [&](int i) -> std::pair<int, int> {
    if (i < 2 * n) return {block_x - 1, block_y + 2 * n - 1 - i};
    if (i == 2 * n) return {block_x - 1, block_y - 1};
    return {block_x + (i - 2 * n - 1), block_y - 1};
  };
  std::vector<int> line(static_cast<std::size_t>(count));
  std::vector<bool> avail(static_cast<std::size_t>(count));
  bool any = false;
  for (int i = 0; i < count; ++i) {
    auto [x, y] = coord(i);
    avail[i] = sample_available(recon, n, block_x, block_y, x, y);
    if (avail[i]) {
      line[i] = recon.at(x, y);
      any = true;
    }
  }
  if (!any) {
    std::fill(line.begin(), line.end(), 128);
  } else {
    if (!avail[0]) {
      int i = 1;
      while (!avail[i]) ++i;
      line[0] = line[i];
    }
    for (int i = 1; i < count; ++i)
      if (!avail[i]) line[i] = line[i - 1];
  }
  References r;
  r.n = n;
  r.left.resize(2 * static_cast<std::size_t>(n));
  r.top.resize(2 * static_cast<std::size_t>(n) + 1);
  for (int y = 0; y < 2 * n; ++y) r.left[y] = line[2 * n - 1 - y];
  for (int x = 0; x <= 2 * n; ++x) r.top[x] = line[2 * n + x];
  return r;
}

namespace detail {

// Displacement per row/column in 1/32 sample units, indexed by mode - 2.
inline constexpr std::array<int, 33> kAngle = {32,  26,  21,  17,  13,  9,  5,  2,  0,  -2, -5, -9, -13, -17, -21, -26, -32,
                                               -26, -21, -17, -13, -9,  -5, -2, 0,  2,  5,  9,  13, 17,  21,  26,  32};

// 256 * 32 / angle for the negative angles, used to project the side
// references onto the main reference line.
inline int inverse_angle(int angle) {
  switch (angle) {
    case -2: return -4096;
    case -5: return -1638;
    case -9: return -910;
    case -13: return -630;
    case -17: return -482;
    case -21: return -390;
    case -26: return -315;
    case -32: return -256;
    default: return 0;
  }
}

inline int log2_size(int n) {
  int k = 0;
  while ((1 << k) < n) ++k;
  return k;
}

inline std::uint8_t clip8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

}  // namespace detail

inline int displacement(IntraMode mode) {
  if (!mode.is_angular()) throw InternalError("displacement of a non-angular mode");
  return detail::kAngle[static_cast<std::size_t>(mode.value() - 2)];
}

/// Prediction of an N x N block from its references.
inline Block predict(IntraMode mode, const References& refs) {
  const int n = refs.n;
  const int shift = detail::log2_size(n);
  Block pred(static_cast<std::size_t>(n) * n);
  auto out = [&](int x, int y) -> std::uint8_t& { return pred[static_cast<std::size_t>(y) * n + x]; };

  if (mode == kPlanar) {
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        out(x, y) = detail::clip8(((n - 1 - x) * refs.side(y) + (x + 1) * refs.above(n) +
                                   (n - 1 - y) * refs.above(x) + (y + 1) * refs.side(n) + n) >>
                                  (shift + 1));
    return pred;
  }
  if (mode == kDc) {
    int sum = n;
    for (int i = 0; i < n; ++i) sum += refs.above(i) + refs.side(i);
    std::fill(pred.begin(), pred.end(), detail::clip8(sum >> (shift + 1)));
    return pred;
  }

  const bool vertical = mode.value() >= 18;
  const int angle = displacement(mode);
  // Main reference line indexed from -n to 2n; main(k) = ref[k + n].
  std::vector<int> ref(3 * static_cast<std::size_t>(n) + 1);
  auto main_at = [&](int k) -> int& { return ref[static_cast<std::size_t>(k + n)]; };
  auto main_src = [&](int k) { return vertical ? refs.above(k - 1) : refs.side(k - 1); };
  auto side_src = [&](int k) { return vertical ? refs.side(k - 1) : refs.above(k - 1); };

  for (int k = 0; k <= n; ++k) main_at(k) = main_src(k);
  if (angle < 0) {
    const int last = (n * angle) >> 5;
    if (last < -1) {
      const int inv = detail::inverse_angle(angle);
      for (int k = last; k <= -1; ++k) main_at(k) = side_src((k * inv + 128) >> 8);
    }
  } else {
    for (int k = n + 1; k <= 2 * n; ++k) main_at(k) = main_src(k);
  }

  for (int j = 0; j < n; ++j) {  // j: distance from the main reference line
    const int pos = (j + 1) * angle;
    const int idx = pos >> 5;
    const int frac = pos & 31;
    for (int i = 0; i < n; ++i) {  // i: position along the line
      int v = main_at(i + idx + 1);
      if (frac != 0) v = ((32 - frac) * v + frac * main_at(i + idx + 2) + 16) >> 5;
      if (vertical)
        out(i, j) = detail::clip8(v);
      else
        out(j, i) = detail::clip8(v);
    }
  }
  return pred;
}

/// Most probable modes from the left and above neighbours; a missing
/// neighbour counts as DC.
inline MpmList derive_mpm(std::optional<IntraMode> left, std::optional<IntraMode> above) {
  const IntraMode a = left.value_or(kDc);
  const IntraMode b = above.value_or(kDc);
  if (a == b) {
    if (!a.is_angular()) return {kPlanar, kDc, kVertical};
    const int v = a.value() - 2;
    return {a, IntraMode(2 + (v + 31) % 32), IntraMode(2 + (v + 1) % 32)};
  }
  for (IntraMode c : {kPlanar, kDc, kVertical})
    if (c != a && c != b) return {a, b, c};
  throw InternalError("unreachable MPM derivation");
}

/// Context index of the regular-coded MPM flag, from the neighbours' flags.
inline int mpm_flag_context(bool left_flag, bool above_flag) { return int{left_flag} + int{above_flag}; }

inline constexpr int kBypass = -1;

/// One bin and how it is coded: a regular context index, or kBypass.
struct CodedBin {
  int bit = 0;
  int context = kBypass;
  friend bool operator==(const CodedBin&, const CodedBin&) = default;
};

/// Position of `mode` in the MPM list, if present.
inline std::optional<int> mpm_index(IntraMode mode, const MpmList& mpms) {
  for (int k = 0; k < 3; ++k)
    if (mpms[k] == mode) return k;
  return std::nullopt;
}

/// MPM flag (regular), then "0"/"10"/"11" for an MPM hit or the 5-bit index
/// among the 32 remaining modes, all bypass.
inline std::vector<CodedBin> binarize_mode(IntraMode mode, const MpmList& mpms, int flag_context) {
  std::vector<CodedBin> bins;
  if (auto k = mpm_index(mode, mpms)) {
    bins.push_back({1, flag_context});
    bins.push_back({*k == 0 ? 0 : 1, kBypass});
    if (*k > 0) bins.push_back({*k == 1 ? 0 : 1, kBypass});
    return bins;
  }
  bins.push_back({0, flag_context});
  int rank = mode.value();
  for (IntraMode m : mpms)
    if (m < mode) --rank;
  for (int b = 4; b >= 0; --b) bins.push_back({(rank >> b) & 1, kBypass});
  return bins;
}

/// Inverse of binarize_mode pulling bins on demand. `next_bin(context)` must
/// return the next bin decoded with that context (or bypass).
inline IntraMode debinarize_mode(const std::function<int(int)>& next_bin, const MpmList& mpms, int flag_context) {
  if (next_bin(flag_context)) {
    if (!next_bin(kBypass)) return mpms[0];
    return next_bin(kBypass) ? mpms[2] : mpms[1];
  }
  int rank = 0;
  for (int b = 0; b < 5; ++b) rank = (rank << 1) | next_bin(kBypass);
  for (int v = 0; v < kNumModes; ++v) {
    const IntraMode m(v);
    if (mpm_index(m, mpms)) continue;
    if (rank-- == 0) return m;
  }
  throw FormatError("corrupt mode bins");
}

/// Inverse of binarize_mode over a complete bin string.
inline IntraMode debinarize_mode(std::span<const int> bins, const MpmList& mpms) {
  std::size_t pos = 0;
  auto next = [&](int) {
    if (pos >= bins.size()) throw FormatError("corrupt mode bins: too short");
    const int b = bins[pos++];
    if (b != 0 && b != 1) throw FormatError("corrupt mode bins: not binary");
    return b;
  };
  const IntraMode m = debinarize_mode(next, mpms, 0);
  if (pos != bins.size()) throw FormatError("corrupt mode bins: trailing bins");
  return m;
}

inline std::int64_t ssd(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int d = int{a[i]} - int{b[i]};
    sum += d * d;
  }
  return sum;
}

/// Mode with the smallest prediction SSD; ties go to the lowest mode.
inline IntraMode mode_decision(std::span<const std::uint8_t> original, const References& refs) {
  IntraMode best = kPlanar;
  auto best_cost = std::numeric_limits<std::int64_t>::max();
  for (int v = 0; v < kNumModes; ++v) {
    const IntraMode m(v);
    const auto cost = ssd(original, predict(m, refs));
    if (cost < best_cost) {
      best_cost = cost;
      best = m;
    }
  }
  return best;
}

}  // namespace macnn::intra
