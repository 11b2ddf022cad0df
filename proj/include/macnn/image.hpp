#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "macnn/bytes.hpp"
#include "macnn/error.hpp"

namespace macnn {

/// Single 8-bit luma plane, row-major.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;

  Plane() = default;
  Plane(int w, int h, std::uint8_t fill = 0) : width(w), height(h), samples(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const Plane&, const Plane&) = default;
};

/// Copies `src` into a plane grown to multiples of n by edge replication.
inline Plane pad_to_multiple(const Plane& src, int n) {
  const int w = (src.width + n - 1) / n * n;
  const int h = (src.height + n - 1) / n * n;
  Plane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = src.at(std::min(x, src.width - 1), std::min(y, src.height - 1));
  return out;
}

inline Plane crop(const Plane& src, int width, int height) {
  Plane out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out.at(x, y) = src.at(x, y);
  return out;
}

namespace detail {

inline int pgm_skip_space(ByteReader& in) {
  // Skips whitespace and '#' comments; returns the first significant byte.
  for (;;) {
    int c = in.u8();
    if (c == '#') {
      while (c != '\n' && c != '\r') c = in.u8();
    } else if (c != ' ' && c != '\t' && c != '\n' && c != '\r') {
      return c;
    }
  }
}

inline int pgm_read_int(ByteReader& in) {
  int c = pgm_skip_space(in);
  if (c < '0' || c > '9') throw FormatError("bad PGM header");
  long v = 0;
  while (c >= '0' && c <= '9') {
    v = v * 10 + (c - '0');
    if (v > 1'000'000) throw FormatError("bad PGM header: value too large");
    c = in.u8();
  }
  // The single whitespace byte after the value has been consumed.
  return static_cast<int>(v);
}

}  // namespace detail

/// Parses a binary (P5) 8-bit PGM.
inline Plane parse_pgm(std::span<const std::uint8_t> bytes) {
  try {
    ByteReader in(bytes);
    if (in.str(2) != "P5") throw FormatError("not a binary PGM (P5)");
    const int w = detail::pgm_read_int(in);
    const int h = detail::pgm_read_int(in);
    const int maxval = detail::pgm_read_int(in);
    if (w <= 0 || h <= 0) throw FormatError("bad PGM dimensions");
    if (maxval <= 0 || maxval > 255) throw FormatError("only 8-bit PGM is supported");
    Plane p(w, h);
    auto raw = in.raw(p.samples.size());
    std::copy(raw.begin(), raw.end(), p.samples.begin());
    return p;
  } catch (const FormatError& e) {
    throw FormatError(std::string("PGM: ") + e.what());
  }
}

inline Bytes format_pgm(const Plane& p) {
  ByteWriter out;
  out.str("P5\n" + std::to_string(p.width) + " " + std::to_string(p.height) + "\n255\n");
  out.raw(p.samples);
  return std::move(out).take();
}

inline Plane read_pgm(const std::filesystem::path& path) { return parse_pgm(read_file(path)); }
inline void write_pgm(const std::filesystem::path& path, const Plane& p) { write_file(path, format_pgm(p)); }

}  // namespace macnn
