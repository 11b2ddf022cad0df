#include <gtest/gtest.h>

#include <chrono>

#include "macnn/selftest.hpp"
#include "test_util.hpp"

namespace macnn::selftest {
namespace {

std::string fixture_text() {
  const auto bytes = read_file(testing::fixture_path("golden_vectors.txt"));
  return {bytes.begin(), bytes.end()};
}

TEST(Selftest, FixtureFileEqualsEmbeddedVectors) { EXPECT_EQ(parse_golden(fixture_text()), embedded_golden()); }

TEST(Selftest, AllChecksPass) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto checks = run(embedded_golden());
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 10.0);
  for (const auto& c : checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(Selftest, CorruptedFixtureFails) {
  auto golden = parse_golden(fixture_text());
  auto& hex = golden.at("coder_mixed_bins");
  hex[10] = hex[10] == '0' ? '1' : '0';
  golden.erase("coder_uniform_ramp");
  const auto checks = run(golden);
  for (const auto& c : checks) {
    if (c.name == "coder_mixed_bins") {
      EXPECT_FALSE(c.passed);
    }
    if (c.name == "coder_uniform_ramp") {
      EXPECT_FALSE(c.passed);
      EXPECT_EQ(c.detail, "fixture missing");
    }
  }
}

TEST(Selftest, ParseSkipsCommentsAndBlanks) {
  EXPECT_EQ(parse_golden("# c\n\na 00ff\n"), (std::map<std::string, std::string>{{"a", "00ff"}}));
  EXPECT_EQ(to_hex(Bytes{0x00, 0xab, 0x10}), "00ab10");
}

}  // namespace
}  // namespace macnn::selftest
