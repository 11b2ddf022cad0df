#pragma once

#include <fmt/format.h>

#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "macnn/intra.hpp"
#include "macnn/nn.hpp"
#include "macnn/range_coder.hpp"
#include "macnn/synth.hpp"

namespace macnn::selftest {

/// Golden byte strings, hex encoded. Regenerate only on an intentional
/// bitstream change.
inline std::map<std::string, std::string> embedded_golden() {
  return {
      {"coder_uniform_ramp", "0038c5e4e662bcd69905556fb37344439769341758aa39058000"},
      {"coder_mixed_bins", "3e1badc3f36cc27e7dbff97896d0f1b9d3990c623bfbe96767b2a03442849567021ee2bc73f4008ec4dc0bb7f966ae24e97b08d328317aabf5c921dcc77821f09e7474c33ab583ad09f237beab4f3c6200"},
  };
}

/// Parses "name hex" lines; blank lines and '#' comments are skipped.
inline std::map<std::string, std::string> parse_golden(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string name, hex;
    fields >> name >> hex;
    if (!name.empty()) out[name] = hex;
  }
  return out;
}

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
  std::string s;
  for (auto b : bytes) s += fmt::format("{:02x}", b);
  return s;
}

/// Symbols 0..34 under the uniform table.
inline Bytes golden_uniform_ramp() {
  coder::RangeEncoder enc;
  const auto table = coder::FrequencyTable::uniform();
  for (std::size_t s = 0; s < 35; ++s) enc.encode_symbol(table, s);
  return enc.finish();
}

/// A fixed interleaving of adaptive bins, bypass bins and skewed 35-ary symbols.
inline Bytes golden_mixed_bins() {
  coder::RangeEncoder enc;
  coder::BinaryContext ctx;
  std::array<std::uint32_t, 35> f{};
  f.fill(1);
  f[3] = 16384;
  f[7] = 8192;
  f[34] = coder::kProbTotal - 16384 - 8192 - 32;
  const coder::FrequencyTable skewed(f);
  for (int i = 0; i < 200; ++i) {
    enc.encode_bin(ctx, (i % 7) != 0);
    enc.encode_bypass((i * 5 + 1) % 3 == 0);
    enc.encode_symbol(skewed, static_cast<std::size_t>((i % 5 == 0) ? 34 : (i % 3 == 0) ? 7 : 3));
  }
  return enc.finish();
}

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline Check check_golden(const std::string& name, const Bytes& produced, const std::map<std::string, std::string>& golden,
                          const std::function<bool(const Bytes&)>& roundtrip) {
  Check c{name, false, {}};
  auto it = golden.find(name);
  if (it == golden.end()) {
    c.detail = "fixture missing";
    return c;
  }
  const bool same = to_hex(produced) == it->second;
  const bool rt = roundtrip(produced);
  c.passed = same && rt;
  c.detail = same ? (rt ? "bytes match, roundtrip exact" : "roundtrip failed") : "bytes differ from fixture";
  return c;
}

inline std::vector<Check> run(const std::map<std::string, std::string>& golden) {
  std::vector<Check> checks;

  checks.push_back(check_golden("coder_uniform_ramp", golden_uniform_ramp(), golden, [](const Bytes& b) {
    coder::RangeDecoder dec(b);
    const auto table = coder::FrequencyTable::uniform();
    for (std::size_t s = 0; s < 35; ++s)
      if (dec.decode_symbol(table) != s) return false;
    return dec.at_end();
  }));

  checks.push_back(check_golden("coder_mixed_bins", golden_mixed_bins(), golden, [](const Bytes& b) {
    coder::RangeDecoder dec(b);
    coder::BinaryContext ctx;
    std::array<std::uint32_t, 35> f{};
    f.fill(1);
    f[3] = 16384;
    f[7] = 8192;
    f[34] = coder::kProbTotal - 16384 - 8192 - 32;
    const coder::FrequencyTable skewed(f);
    for (int i = 0; i < 200; ++i) {
      if (dec.decode_bin(ctx) != int{(i % 7) != 0}) return false;
      if (dec.decode_bypass() != int{(i * 5 + 1) % 3 == 0}) return false;
      const std::size_t want = (i % 5 == 0) ? 34 : (i % 3 == 0) ? 7 : 3;
      if (dec.decode_symbol(skewed) != want) return false;
    }
    return dec.at_end();
  }));

  {
    // Random 3x8x8 input against a direct six-loop convolution.
    synth::Rng rng(11);
    Tensor input({3, 8, 8}), kernel({32, 3, 4, 4}), bias({32});
    for (float& v : input.data()) v = static_cast<float>(rng.uniform(-1, 1));
    for (float& v : kernel.data()) v = static_cast<float>(rng.uniform(-1, 1));
    for (float& v : bias.data()) v = static_cast<float>(rng.uniform(-1, 1));
    const auto out = nn::conv2d_same(input, kernel, bias);
    double worst = 0.0;
    for (int k = 0; k < 32; ++k)
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
          double ref = bias[static_cast<std::size_t>(k)];
          for (int c = 0; c < 3; ++c)
            for (int dy = 0; dy < 4; ++dy)
              for (int dx = 0; dx < 4; ++dx) {
                const int iy = y + dy - 1, ix = x + dx - 1;
                if (iy < 0 || iy >= 8 || ix < 0 || ix >= 8) continue;
                ref += double{kernel[static_cast<std::size_t>(((k * 3 + c) * 4 + dy) * 4 + dx)]} * input.at(c, iy, ix);
              }
          worst = std::max(worst, std::abs(ref - out.at(k, y, x)));
        }
    checks.push_back({"conv_oracle", worst <= 1e-5, fmt::format("max abs error {:.3g}", worst)});
  }

  {
    using intra::derive_mpm;
    const bool ok = derive_mpm(kDc, kDc) == MpmList{kPlanar, kDc, kVertical} &&
                    derive_mpm(IntraMode(10), IntraMode(10)) == MpmList{IntraMode(10), IntraMode(9), IntraMode(11)} &&
                    derive_mpm(kPlanar, kVertical) == MpmList{kPlanar, kVertical, kDc} &&
                    derive_mpm(IntraMode(2), IntraMode(2)) == MpmList{IntraMode(2), IntraMode(33), IntraMode(3)} &&
                    derive_mpm(std::nullopt, std::nullopt) == MpmList{kPlanar, kDc, kVertical};
    checks.push_back({"mpm_table", ok, ok ? "derivation rules match" : "derivation rules differ"});
  }
  return checks;
}

}  // namespace macnn::selftest
