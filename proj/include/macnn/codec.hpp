#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "macnn/bytes.hpp"
#include "macnn/error.hpp"
#include "macnn/image.hpp"
#include "macnn/intra.hpp"
#include "macnn/mode.hpp"
#include "macnn/nn.hpp"
#include "macnn/range_coder.hpp"
#include "macnn/transform.hpp"

namespace macnn::codec {

enum class ModeCoder : std::uint8_t { kBaseline = 0, kCnn = 1 };

inline const char* to_string(ModeCoder m) { return m == ModeCoder::kCnn ? "cnn" : "baseline"; }

struct EncodeOptions {
  int n = 8;
  int qp = 32;
  ModeCoder mode_coder = ModeCoder::kBaseline;
  const nn::ModelWeights* weights = nullptr;  // required for kCnn
};

/// What both encoder and decoder know about one block once it is coded.
struct BlockInfo {
  int x = 0, y = 0;
  IntraMode mode;
  MpmList mpms;
  bool mpm_flag = false;
  /// Above-left, above and left reconstructed N x N blocks, 128 outside the picture.
  std::vector<std::uint8_t> context;

  friend bool operator==(const BlockInfo&, const BlockInfo&) = default;
};

struct CodingResult {
  Plane recon;  // cropped to the input size
  std::vector<BlockInfo> blocks;
  Bytes mode_stream;
  Bytes residual_stream;
  double mode_ideal_bits = 0.0;

  std::uint64_t mode_bits() const { return 8 * std::uint64_t{mode_stream.size()}; }
  std::uint64_t residual_bits() const { return 8 * std::uint64_t{residual_stream.size()}; }
  std::uint64_t total_bits() const { return mode_bits() + residual_bits(); }
};

struct EncodedImage : CodingResult {
  Bytes container;
};

/// Fields of a MACS container.
struct Container {
  ModeCoder mode_coder = ModeCoder::kBaseline;
  int width = 0, height = 0, n = 8, qp = 32;
  Bytes mode_stream, residual_stream;
};

inline constexpr std::uint32_t kMacsVersion = 1;

inline Bytes write_container(const Container& c) {
  ByteWriter out;
  out.str("MACS");
  out.u32(kMacsVersion);
  out.u8(static_cast<std::uint8_t>(c.mode_coder));
  out.u16(static_cast<std::uint16_t>(c.width));
  out.u16(static_cast<std::uint16_t>(c.height));
  out.u8(static_cast<std::uint8_t>(c.n));
  out.u8(static_cast<std::uint8_t>(c.qp));
  out.u32(static_cast<std::uint32_t>(c.mode_stream.size()));
  out.raw(c.mode_stream);
  out.u32(static_cast<std::uint32_t>(c.residual_stream.size()));
  out.raw(c.residual_stream);
  out.seal_crc();
  return std::move(out).take();
}

inline Container read_container(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  if (bytes.size() < 4 || in.str(4) != "MACS") throw FormatError("not a MACS container");
  in = ByteReader(verify_crc_trailer(bytes));
  in.raw(4);
  if (auto v = in.u32(); v != kMacsVersion) throw FormatError("unsupported MACS version " + std::to_string(v));
  Container c;
  const auto model = in.u8();
  if (model > 1) throw FormatError("unknown mode coder id " + std::to_string(model));
  c.mode_coder = static_cast<ModeCoder>(model);
  c.width = in.u16();
  c.height = in.u16();
  c.n = in.u8();
  c.qp = in.u8();
  if (c.n != 8 && c.n != 16) throw FormatError("MACS block size must be 8 or 16");
  if (c.qp > 51) throw FormatError("MACS qp out of range");
  if (c.width < c.n || c.height < c.n) throw FormatError("MACS picture smaller than one block");
  auto ms = in.raw(in.u32());
  c.mode_stream.assign(ms.begin(), ms.end());
  auto rs = in.raw(in.u32());
  c.residual_stream.assign(rs.begin(), rs.end());
  if (in.remaining() != 0) throw FormatError("trailing bytes in MACS container");
  return c;
}

namespace detail {

/// Adaptive contexts of the residual syntax: coded-block flag, per-position
/// significance, sign and exp-Golomb magnitude (prefix bins contexted by index).
struct ResidualContexts {
  static constexpr int kPrefixContexts = 16;
  coder::BinaryContext coded_block;
  std::vector<coder::BinaryContext> significant;
  std::array<coder::BinaryContext, kPrefixContexts> prefix{};

  explicit ResidualContexts(int n) : significant(static_cast<std::size_t>(n) * n) {}
};

inline void encode_residual(coder::RangeEncoder& enc, ResidualContexts& ctx, std::span<const std::int32_t> levels) {
  const bool any = std::any_of(levels.begin(), levels.end(), [](std::int32_t v) { return v != 0; });
  enc.encode_bin(ctx.coded_block, any);
  if (!any) return;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::int32_t level = levels[i];
    enc.encode_bin(ctx.significant[i], level != 0);
    if (level == 0) continue;
    enc.encode_bypass(level < 0);
    // Order-0 exp-Golomb of |level| - 1.
    std::uint32_t m = static_cast<std::uint32_t>(level < 0 ? -static_cast<std::int64_t>(level) : level) - 1;
    int k = 0;
    while (m >= (1u << k)) {
      enc.encode_bin(ctx.prefix[std::min(k, ResidualContexts::kPrefixContexts - 1)], 1);
      m -= 1u << k;
      ++k;
    }
    enc.encode_bin(ctx.prefix[std::min(k, ResidualContexts::kPrefixContexts - 1)], 0);
    for (int b = k - 1; b >= 0; --b) enc.encode_bypass((m >> b) & 1);
  }
}

inline std::vector<std::int32_t> decode_residual(coder::RangeDecoder& dec, ResidualContexts& ctx, int n) {
  std::vector<std::int32_t> levels(static_cast<std::size_t>(n) * n, 0);
  if (!dec.decode_bin(ctx.coded_block)) return levels;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!dec.decode_bin(ctx.significant[i])) continue;
    const bool negative = dec.decode_bypass();
    int k = 0;
    std::uint32_t m = 0;
    while (dec.decode_bin(ctx.prefix[std::min(k, ResidualContexts::kPrefixContexts - 1)])) {
      m += 1u << k;
      if (++k > 24) throw FormatError("corrupt residual magnitude");
    }
    std::uint32_t suffix = 0;
    for (int b = 0; b < k; ++b) suffix = (suffix << 1) | static_cast<std::uint32_t>(dec.decode_bypass());
    const auto magnitude = static_cast<std::int32_t>(m + suffix + 1);
    levels[i] = negative ? -magnitude : magnitude;
  }
  return levels;
}

inline std::vector<std::uint8_t> gather_context(const Plane& recon, int n, int bx, int by) {
  std::vector<std::uint8_t> ctx(3 * static_cast<std::size_t>(n) * n, 128);
  const std::array<std::pair<int, int>, 3> origins = {{{bx - n, by - n}, {bx, by - n}, {bx - n, by}}};
  for (std::size_t c = 0; c < 3; ++c) {
    auto [ox, oy] = origins[c];
    if (ox < 0 || oy < 0) continue;
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) ctx[(c * n + y) * n + x] = recon.at(ox + x, oy + y);
  }
  return ctx;
}

/// Per-block neighbourhood shared by encoder and decoder.
class ModeNeighbourhood {
 public:
  ModeNeighbourhood(int blocks_x, int blocks_y) : blocks_x_(blocks_x), info_(static_cast<std::size_t>(blocks_x) * blocks_y) {}

  struct Derived {
    MpmList mpms;
    int flag_context = 0;
  };

  Derived derive(int col, int row) const {
    const Entry* left = col > 0 ? &at(col - 1, row) : nullptr;
    const Entry* above = row > 0 ? &at(col, row - 1) : nullptr;
    Derived d;
    d.mpms = intra::derive_mpm(left ? std::optional(left->mode) : std::nullopt,
                               above ? std::optional(above->mode) : std::nullopt);
    d.flag_context = intra::mpm_flag_context(left && left->mpm_flag, above && above->mpm_flag);
    return d;
  }

  void set(int col, int row, IntraMode mode, bool mpm_flag) { info_[index(col, row)] = {mode, mpm_flag}; }

 private:
  struct Entry {
    IntraMode mode;
    bool mpm_flag = false;
  };
  std::size_t index(int col, int row) const { return static_cast<std::size_t>(row) * blocks_x_ + col; }
  const Entry& at(int col, int row) const { return info_[index(col, row)]; }

  int blocks_x_;
  std::vector<Entry> info_;
};

inline Tensor context_tensor(std::span<const std::uint8_t> ctx, int n) {
  std::vector<float> v(ctx.size());
  for (std::size_t i = 0; i < ctx.size(); ++i) v[i] = static_cast<float>(ctx[i]) / 255.0f;
  const auto un = static_cast<std::size_t>(n);
  return Tensor({3, un, un}, std::move(v));
}

inline coder::FrequencyTable cnn_table(const BlockInfo& b, int n, const nn::ModelWeights& w) {
  return coder::quantize_dist(nn::forward(context_tensor(b.context, n), b.mpms, w));
}

inline void check_weights(const EncodeOptions& opt) {
  if (opt.mode_coder != ModeCoder::kCnn) return;
  if (!opt.weights) throw UsageError("the cnn mode coder needs weights");
  if (opt.weights->block_size != opt.n)
    throw ShapeError("weights are for N=" + std::to_string(opt.weights->block_size) + " but N=" +
                     std::to_string(opt.n) + " was requested");
}

/// Writes prediction + residual into the reconstruction.
inline void reconstruct(Plane& recon, int bx, int by, int n, const intra::Block& pred, std::span<const int> residual) {
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const auto i = static_cast<std::size_t>(y) * n + x;
      recon.at(bx + x, by + y) = static_cast<std::uint8_t>(std::clamp(int{pred[i]} + residual[i], 0, 255));
    }
}

}  // namespace detail

/// Encodes a picture block by block in raster order with closed-loop
/// reconstruction. Mode and residual syntax go to two separate streams.
inline EncodedImage encode_image(const Plane& input, const EncodeOptions& opt) {
  nn::ModelWeights::check_block_size(opt.n);
  const transform::QuantConfig quant(opt.qp);
  detail::check_weights(opt);
  if (input.width < opt.n || input.height < opt.n) throw UsageError("picture is smaller than one block");
  if (input.width > 0xFFFF || input.height > 0xFFFF) throw UsageError("picture is too large for the container");

  const int n = opt.n;
  const Plane src = pad_to_multiple(input, n);
  Plane recon(src.width, src.height, 0);
  const transform::Dct dct(n);
  const int blocks_x = src.width / n, blocks_y = src.height / n;
  detail::ModeNeighbourhood hood(blocks_x, blocks_y);

  coder::RangeEncoder mode_enc, residual_enc;
  std::array<coder::BinaryContext, 3> flag_ctx{};
  detail::ResidualContexts residual_ctx(n);

  EncodedImage result;
  result.blocks.reserve(static_cast<std::size_t>(blocks_x) * blocks_y);
  std::vector<std::uint8_t> original(static_cast<std::size_t>(n) * n);

  for (int row = 0; row < blocks_y; ++row) {
    for (int col = 0; col < blocks_x; ++col) {
      const int bx = col * n, by = row * n;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) original[static_cast<std::size_t>(y) * n + x] = src.at(bx + x, by + y);

      const auto refs = intra::build_references(recon, n, bx, by);
      const auto derived = hood.derive(col, row);
      BlockInfo info;
      info.x = bx;
      info.y = by;
      info.mode = intra::mode_decision(original, refs);
      info.mpms = derived.mpms;
      info.mpm_flag = intra::mpm_index(info.mode, info.mpms).has_value();
      info.context = detail::gather_context(recon, n, bx, by);

      if (opt.mode_coder == ModeCoder::kBaseline) {
        for (const auto& bin : intra::binarize_mode(info.mode, info.mpms, derived.flag_context)) {
          if (bin.context == intra::kBypass)
            mode_enc.encode_bypass(bin.bit);
          else
            mode_enc.encode_bin(flag_ctx[static_cast<std::size_t>(bin.context)], bin.bit);
        }
      } else {
        mode_enc.encode_symbol(detail::cnn_table(info, n, *opt.weights), static_cast<std::size_t>(info.mode.value()));
      }

      const auto pred = intra::predict(info.mode, refs);
      std::vector<int> residual(pred.size());
      for (std::size_t i = 0; i < pred.size(); ++i) residual[i] = int{original[i]} - int{pred[i]};
      const auto levels = transform::transform_quant(dct, residual, quant);
      detail::encode_residual(residual_enc, residual_ctx, levels);
      detail::reconstruct(recon, bx, by, n, pred, transform::dequant_inverse(dct, levels, quant));

      hood.set(col, row, info.mode, info.mpm_flag);
      result.blocks.push_back(std::move(info));
    }
  }

  result.mode_ideal_bits = mode_enc.ideal_bits();
  result.mode_stream = mode_enc.finish();
  result.residual_stream = residual_enc.finish();
  result.recon = crop(recon, input.width, input.height);
  result.container = write_container(
      {opt.mode_coder, input.width, input.height, n, opt.qp, result.mode_stream, result.residual_stream});
  return result;
}

/// Decodes a MACS container. `weights` is needed when it was coded with the cnn arm.
inline CodingResult decode_image(std::span<const std::uint8_t> container, const nn::ModelWeights* weights = nullptr) {
  Container c = read_container(container);
  const int n = c.n;
  const transform::QuantConfig quant(c.qp);
  EncodeOptions opt{n, c.qp, c.mode_coder, weights};
  detail::check_weights(opt);

  const int padded_w = (c.width + n - 1) / n * n, padded_h = (c.height + n - 1) / n * n;
  Plane recon(padded_w, padded_h, 0);
  const transform::Dct dct(n);
  const int blocks_x = padded_w / n, blocks_y = padded_h / n;
  detail::ModeNeighbourhood hood(blocks_x, blocks_y);

  coder::RangeDecoder mode_dec(c.mode_stream), residual_dec(c.residual_stream);
  std::array<coder::BinaryContext, 3> flag_ctx{};
  detail::ResidualContexts residual_ctx(n);

  CodingResult result;
  result.blocks.reserve(static_cast<std::size_t>(blocks_x) * blocks_y);
  double ideal = 0.0;

  for (int row = 0; row < blocks_y; ++row) {
    for (int col = 0; col < blocks_x; ++col) {
      const int bx = col * n, by = row * n;
      const auto refs = intra::build_references(recon, n, bx, by);
      const auto derived = hood.derive(col, row);
      BlockInfo info;
      info.x = bx;
      info.y = by;
      info.mpms = derived.mpms;
      info.context = detail::gather_context(recon, n, bx, by);

      if (c.mode_coder == ModeCoder::kBaseline) {
        auto next_bin = [&](int context) {
          if (context == intra::kBypass) {
            ideal += 1.0;
            return mode_dec.decode_bypass();
          }
          auto& ctx = flag_ctx[static_cast<std::size_t>(context)];
          const auto f0 = ctx.freq0();
          const int bit = mode_dec.decode_bin(ctx);
          ideal += coder::event_bits(bit ? coder::kProbTotal - f0 : f0);
          return bit;
        };
        info.mode = intra::debinarize_mode(next_bin, info.mpms, derived.flag_context);
      } else {
        const auto table = detail::cnn_table(info, n, *weights);
        info.mode = IntraMode(static_cast<int>(mode_dec.decode_symbol(table)));
        ideal += coder::event_bits(table.freq(static_cast<std::size_t>(info.mode.value())));
      }
      info.mpm_flag = intra::mpm_index(info.mode, info.mpms).has_value();

      const auto pred = intra::predict(info.mode, refs);
      const auto levels = detail::decode_residual(residual_dec, residual_ctx, n);
      detail::reconstruct(recon, bx, by, n, pred, transform::dequant_inverse(dct, levels, quant));

      hood.set(col, row, info.mode, info.mpm_flag);
      result.blocks.push_back(std::move(info));
    }
  }
  if (!mode_dec.at_end()) throw FormatError("mode stream has unread bytes");
  if (!residual_dec.at_end()) throw FormatError("residual stream has unread bytes");

  result.mode_ideal_bits = ideal;
  result.mode_stream = std::move(c.mode_stream);
  result.residual_stream = std::move(c.residual_stream);
  result.recon = crop(recon, c.width, c.height);
  return result;
}

}  // namespace macnn::codec
