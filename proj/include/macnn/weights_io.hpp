#pragma once

#include <set>
#include <string>

#include "macnn/bytes.hpp"
#include "macnn/nn.hpp"

namespace macnn::nn {

inline constexpr std::uint32_t kMacwVersion = 1;

// Layout (little-endian): "MACW", u32 version, u32 N, u32 tensor count, then per
// tensor u16 name length, name, u8 rank, rank x u32 dims, f32 payload; u32 CRC-32.
inline Bytes save_weights(const ModelWeights& w) {
  w.validate();
  ByteWriter out;
  out.str("MACW");
  out.u32(kMacwVersion);
  out.u32(static_cast<std::uint32_t>(w.block_size));
  out.u32(static_cast<std::uint32_t>(ModelWeights::kNames.size()));
  for (auto name : ModelWeights::kNames) {
    const Tensor& t = w.by_name(name);
    out.u16(static_cast<std::uint16_t>(name.size()));
    out.str(name);
    out.u8(static_cast<std::uint8_t>(t.rank()));
    for (auto d : t.dims()) out.u32(static_cast<std::uint32_t>(d));
    for (float v : t.data()) out.f32(v);
  }
  out.seal_crc();
  return std::move(out).take();
}

inline ModelWeights load_weights(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  if (bytes.size() < 4 || in.str(4) != "MACW") throw FormatError("not a MACW weight file");
  auto body = verify_crc_trailer(bytes);
  in = ByteReader(body);
  in.raw(4);
  if (auto version = in.u32(); version != kMacwVersion)
    throw FormatError("unsupported MACW version " + std::to_string(version));
  ModelWeights w;
  const std::uint32_t n = in.u32();
  if (n != 8 && n != 16) throw ShapeError("MACW block size must be 8 or 16, got " + std::to_string(n));
  w.block_size = static_cast<int>(n);
  const std::uint32_t count = in.u32();
  if (count != ModelWeights::kNames.size()) throw ShapeError("MACW must hold 8 tensors, has " + std::to_string(count));

  std::set<std::string> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = in.str(in.u16());
    std::vector<std::size_t> dims(in.u8());
    if (dims.empty() || dims.size() > 4) throw ShapeError("tensor " + name + " has invalid rank");
    std::size_t elements = 1;
    for (auto& d : dims) {
      d = in.u32();
      elements *= d;
      if (d == 0 || elements > body.size()) throw FormatError("tensor " + name + " has implausible dims");
    }
    if (!seen.insert(name).second) throw ShapeError("duplicate tensor " + name);
    if (dims != ModelWeights::expected_dims(name, w.block_size))
      throw ShapeError("tensor " + name + " has the wrong shape for N=" + std::to_string(n));
    std::vector<float> data(elements);
    for (float& v : data) v = in.f32();
    w.by_name(name) = Tensor(std::move(dims), std::move(data));
  }
  if (in.remaining() != 0) throw FormatError("trailing bytes after MACW tensors");
  w.validate();
  return w;
}

inline ModelWeights load_weights_file(const std::filesystem::path& path) { return load_weights(read_file(path)); }

}  // namespace macnn::nn
