#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "macnn/bytes.hpp"
#include "macnn/error.hpp"

namespace macnn::coder {

inline constexpr int kProbBits = 15;
inline constexpr std::uint32_t kProbTotal = 1u << kProbBits;

/// Integer model over K symbols whose frequencies sum to exactly 2^15, each >= 1.
template <std::size_t K>
class BasicFrequencyTable {
 public:
  static_assert(K >= 2 && K <= kProbTotal);

  explicit BasicFrequencyTable(const std::array<std::uint32_t, K>& freq) : freq_(freq) {
    cum_[0] = 0;
    for (std::size_t i = 0; i < K; ++i) {
      if (freq_[i] == 0) throw InternalError("frequency table entry " + std::to_string(i) + " is zero");
      cum_[i + 1] = cum_[i] + freq_[i];
    }
    if (cum_[K] != kProbTotal) throw InternalError("frequency table total is " + std::to_string(cum_[K]));
  }

  static BasicFrequencyTable uniform() {
    std::array<std::uint32_t, K> f{};
    f.fill(kProbTotal / K);
    for (std::size_t i = 0; i < kProbTotal % K; ++i) ++f[i];
    return BasicFrequencyTable(f);
  }

  static constexpr std::size_t size() { return K; }
  std::uint32_t freq(std::size_t s) const { return freq_[s]; }
  std::uint32_t cum(std::size_t s) const { return cum_[s]; }
  std::uint32_t total() const { return kProbTotal; }
  const std::array<std::uint32_t, K>& freqs() const { return freq_; }

  /// Symbol whose interval [cum[s], cum[s+1]) contains `target` (< total).
  std::size_t find(std::uint32_t target) const {
    auto it = std::upper_bound(cum_.begin() + 1, cum_.end(), target);
    return static_cast<std::size_t>(it - cum_.begin()) - 1;
  }

  friend bool operator==(const BasicFrequencyTable&, const BasicFrequencyTable&) = default;

 private:
  std::array<std::uint32_t, K> freq_{};
  std::array<std::uint32_t, K + 1> cum_{};
};

using FrequencyTable = BasicFrequencyTable<35>;

/// Maps a probability vector onto a table: floor(p * 2^15) with a floor of 1,
/// then the residual is handed out (or taken back) one unit at a time.
/// Surplus goes to the largest fractional remainders; deficits come from the
/// largest entries. Ties always favour the lower index.
template <std::size_t K, typename Real>
BasicFrequencyTable<K> quantize_dist(const std::array<Real, K>& p) {
  std::array<std::uint32_t, K> f{};
  std::array<double, K> remainder{};
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < K; ++i) {
    const double scaled = static_cast<double>(p[i]) * kProbTotal;
    const double fl = std::floor(std::max(scaled, 0.0));
    remainder[i] = scaled - fl;
    f[i] = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::min(fl, double{kProbTotal})));
    assigned += f[i];
  }
  std::int64_t residual = std::int64_t{kProbTotal} - assigned;
  if (residual > 0) {
    std::array<std::size_t, K> order{};
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; residual > 0; ++i, --residual) ++f[order[i % K]];
  }
  while (residual < 0) {
    // Lowest index among the largest entries; always > 1 since total > K.
    const auto it = std::max_element(f.begin(), f.end());
    --*it;
    ++residual;
  }
  return BasicFrequencyTable<K>(f);
}

/// Adaptive count-based estimate of P(bin = 1) = c1 / (c0 + c1).
struct BinaryContext {
  std::uint16_t c0 = 1;
  std::uint16_t c1 = 1;

  static constexpr std::uint32_t kLimit = 256;

  /// Frequency of a zero bin out of 2^15, clamped so both sides stay >= 1.
  std::uint32_t freq0() const {
    const std::uint32_t f1 = (std::uint32_t{c1} << kProbBits) / (std::uint32_t{c0} + c1);
    return kProbTotal - std::clamp<std::uint32_t>(f1, 1, kProbTotal - 1);
  }

  void update(int bit) {
    ++(bit ? c1 : c0);
    if (std::uint32_t{c0} + c1 >= kLimit) {
      c0 = static_cast<std::uint16_t>((c0 + 1) / 2);
      c1 = static_cast<std::uint16_t>((c1 + 1) / 2);
    }
  }

  friend bool operator==(const BinaryContext&, const BinaryContext&) = default;
};

/// -log2 of a coded event's probability, given its frequency out of 2^15.
inline double event_bits(std::uint32_t freq) { return kProbBits - std::log2(static_cast<double>(freq)); }

/// Ideal cost of a sequence of coded events, each given as its frequency out of 2^15.
inline double bit_cost(std::span<const std::uint32_t> event_freqs) {
  double bits = 0.0;
  for (auto f : event_freqs) bits += event_bits(f);
  return bits;
}

namespace detail {
inline constexpr std::uint32_t kTop = 1u << 24;
}

/// Byte-oriented range encoder: 32-bit range, carry propagated through a
/// cached byte plus a run of pending 0xFF bytes. Every interval is scaled by
/// range >> 15; the last symbol of a table absorbs the truncation remainder.
class RangeEncoder {
 public:
  template <std::size_t K>
  void encode_symbol(const BasicFrequencyTable<K>& table, std::size_t s) {
    if (s >= K) throw InternalError("symbol out of range");
    encode_interval(table.cum(s), table.freq(s), s + 1 == K);
    ideal_bits_ += event_bits(table.freq(s));
  }

  /// Codes one bin with the context's current estimate, then adapts it.
  void encode_bin(BinaryContext& ctx, int bit) {
    const std::uint32_t f0 = ctx.freq0();
    if (bit)
      encode_interval(f0, kProbTotal - f0, true);
    else
      encode_interval(0, f0, false);
    ideal_bits_ += event_bits(bit ? kProbTotal - f0 : f0);
    ctx.update(bit);
  }

  /// Codes one bin at probability 1/2 with no context.
  void encode_bypass(int bit) {
    range_ >>= 1;
    if (bit) low_ += range_;
    ideal_bits_ += 1.0;
    normalize();
  }

  /// Flushes the final state. The encoder must not be used afterwards.
  Bytes finish() {
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(out_);
  }

  /// Sum of -log2(p) over every coded event.
  double ideal_bits() const { return ideal_bits_; }
  std::size_t bytes_so_far() const { return out_.size(); }

 private:
  void encode_interval(std::uint32_t cum_low, std::uint32_t freq, bool last) {
    const std::uint32_t r = range_ >> kProbBits;
    low_ += std::uint64_t{r} * cum_low;
    range_ = last ? range_ - r * cum_low : r * freq;
    normalize();
  }

  void normalize() {
    while (range_ < detail::kTop) {
      range_ <<= 8;
      shift_low();
    }
  }

  void shift_low() {
    if (low_ < 0xFF000000u || low_ >= (std::uint64_t{1} << 32)) {
      const auto carry = static_cast<std::uint8_t>(low_ >> 32);
      std::uint8_t pending = cache_;
      do {
        // The very first cached byte sits above the initial interval and can
        // never receive a carry, so it is not emitted.
        if (!first_) out_.push_back(static_cast<std::uint8_t>(pending + carry));
        first_ = false;
        pending = 0xFF;
      } while (--cache_size_ != 0);
      cache_ = static_cast<std::uint8_t>(low_ >> 24);
    }
    ++cache_size_;
    low_ = (low_ & 0x00FFFFFFu) << 8;
  }

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  bool first_ = true;
  Bytes out_;
  double ideal_bits_ = 0.0;
};

/// Mirror of RangeEncoder. Reads exactly the bytes the encoder produced;
/// running past the end raises StreamExhausted.
class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> data) : data_(data) {
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next();
    check();
  }

  template <std::size_t K>
  std::size_t decode_symbol(const BasicFrequencyTable<K>& table) {
    const std::uint32_t r = range_ >> kProbBits;
    const std::uint32_t target = std::min(code_ / r, kProbTotal - 1);
    const std::size_t s = table.find(target);
    decode_interval(r, table.cum(s), table.freq(s), s + 1 == K);
    return s;
  }

  int decode_bin(BinaryContext& ctx) {
    const std::uint32_t f0 = ctx.freq0();
    const std::uint32_t r = range_ >> kProbBits;
    const int bit = code_ >= r * f0 ? 1 : 0;
    if (bit)
      decode_interval(r, f0, kProbTotal - f0, true);
    else
      decode_interval(r, 0, f0, false);
    ctx.update(bit);
    return bit;
  }

  int decode_bypass() {
    range_ >>= 1;
    int bit = 0;
    if (code_ >= range_) {
      code_ -= range_;
      bit = 1;
    }
    check();
    normalize();
    return bit;
  }

  /// True once every input byte has been consumed.
  bool at_end() const { return pos_ == data_.size(); }
  std::size_t bytes_consumed() const { return pos_; }

 private:
  void decode_interval(std::uint32_t r, std::uint32_t cum_low, std::uint32_t freq, bool last) {
    code_ -= r * cum_low;
    range_ = last ? range_ - r * cum_low : r * freq;
    check();
    normalize();
  }

  void check() const {
    if (code_ >= range_) throw FormatError("corrupt arithmetic-coded stream");
  }

  void normalize() {
    while (range_ < detail::kTop) {
      code_ = (code_ << 8) | next();
      range_ <<= 8;
    }
  }

  std::uint32_t next() {
    if (pos_ >= data_.size()) throw StreamExhausted();
    return data_[pos_++];
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t code_ = 0;
};

}  // namespace macnn::coder
