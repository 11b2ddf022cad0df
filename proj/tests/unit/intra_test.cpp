#include <gtest/gtest.h>

#include <map>
#include <set>

#include "macnn/intra.hpp"
#include "test_util.hpp"

namespace macnn::intra {
namespace {

References flat_refs(int n, int v) {
  References r;
  r.n = n;
  r.top.assign(2 * static_cast<std::size_t>(n) + 1, v);
  r.left.assign(2 * static_cast<std::size_t>(n), v);
  return r;
}

References random_refs(synth::Rng& rng, int n) {
  References r = flat_refs(n, 0);
  for (int& v : r.top) v = static_cast<int>(rng.integer(0, 255));
  for (int& v : r.left) v = static_cast<int>(rng.integer(0, 255));
  return r;
}

// Reference-style angular prediction written against the p[x][y] notation,
// with p[-1][-1] the corner, p[x][-1] the row above and p[-1][y] the column left.
Block oracle_predict(int mode, const References& refs) {
  const int n = refs.n;
  auto p = [&](int x, int y) {
    if (y == -1) return refs.top[static_cast<std::size_t>(x + 1)];
    return refs.left[static_cast<std::size_t>(y)];
  };
  static const std::map<int, int> inv = {{11, -4096}, {12, -1638}, {13, -910}, {14, -630}, {15, -482}, {16, -390},
                                         {17, -315}, {18, -256}, {19, -315}, {20, -390}, {21, -482}, {22, -630},
                                         {23, -910}, {24, -1638}, {25, -4096}};
  static const int angles[] = {32, 26, 21, 17, 13, 9, 5, 2, 0, -2, -5, -9, -13, -17, -21, -26, -32,
                               -26, -21, -17, -13, -9, -5, -2, 0, 2, 5, 9, 13, 17, 21, 26, 32};
  const int angle = angles[mode - 2];
  std::map<int, int> ref;
  Block out(static_cast<std::size_t>(n) * n);
  if (mode >= 18) {
    for (int x = 0; x <= n; ++x) ref[x] = p(-1 + x, -1);
    if (angle < 0 && ((n * angle) >> 5) < -1) {
      for (int x = (n * angle) >> 5; x <= -1; ++x) ref[x] = p(-1, -1 + ((x * inv.at(mode) + 128) >> 8));
    } else {
      for (int x = n + 1; x <= 2 * n; ++x) ref[x] = p(-1 + x, -1);
    }
    for (int y = 0; y < n; ++y) {
      const int idx = ((y + 1) * angle) >> 5, fact = ((y + 1) * angle) & 31;
      for (int x = 0; x < n; ++x)
        out[static_cast<std::size_t>(y) * n + x] = static_cast<std::uint8_t>(
            fact ? ((32 - fact) * ref.at(x + idx + 1) + fact * ref.at(x + idx + 2) + 16) >> 5 : ref.at(x + idx + 1));
    }
  } else {
    for (int x = 0; x <= n; ++x) ref[x] = p(-1, -1 + x);
    if (angle < 0 && ((n * angle) >> 5) < -1) {
      for (int x = (n * angle) >> 5; x <= -1; ++x) ref[x] = p(-1 + ((x * inv.at(mode) + 128) >> 8), -1);
    } else {
      for (int x = n + 1; x <= 2 * n; ++x) ref[x] = p(-1, -1 + x);
    }
    for (int x = 0; x < n; ++x) {
      const int idx = ((x + 1) * angle) >> 5, fact = ((x + 1) * angle) & 31;
      for (int y = 0; y < n; ++y)
        out[static_cast<std::size_t>(y) * n + x] = static_cast<std::uint8_t>(
            fact ? ((32 - fact) * ref.at(y + idx + 1) + fact * ref.at(y + idx + 2) + 16) >> 5 : ref.at(y + idx + 1));
    }
  }
  return out;
}

TEST(References, FirstBlockIsAll128) {
  Plane recon(32, 32, 77);
  EXPECT_EQ(build_references(recon, 8, 0, 0), flat_refs(8, 128));
}

TEST(References, AvailabilityFollowsRasterOrder) {
  Plane recon(24, 24, 0);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x) recon.at(x, y) = static_cast<std::uint8_t>(x + 10 * y);
  EXPECT_TRUE(sample_available(recon, 8, 8, 8, 16, 7));   // above-right block precedes
  EXPECT_FALSE(sample_available(recon, 8, 8, 8, 7, 16));  // below-left block does not
  EXPECT_FALSE(sample_available(recon, 8, 8, 8, -1, 3));
  EXPECT_FALSE(sample_available(recon, 8, 16, 16, 24, 15));

  const auto r = build_references(recon, 8, 8, 8);
  EXPECT_EQ(r.above(-1), recon.at(7, 7));
  for (int x = 0; x < 16; ++x) EXPECT_EQ(r.above(x), recon.at(8 + x, 7));
  for (int y = 0; y < 8; ++y) EXPECT_EQ(r.side(y), recon.at(7, 8 + y));
  // Below-left gap takes the nearest available sample in scan order.
  for (int y = 8; y < 16; ++y) EXPECT_EQ(r.side(y), recon.at(7, 15));
}

TEST(References, TopRowBlockSubstitutesFromLeft) {
  Plane recon(24, 24, 0);
  for (int y = 0; y < 8; ++y) recon.at(7, y) = static_cast<std::uint8_t>(50 + y);
  const auto r = build_references(recon, 8, 8, 0);
  for (int y = 0; y < 8; ++y) EXPECT_EQ(r.side(y), 50 + y);
  for (int y = 8; y < 16; ++y) EXPECT_EQ(r.side(y), 57);
  EXPECT_EQ(r.above(-1), 50);
  for (int x = 0; x < 16; ++x) EXPECT_EQ(r.above(x), 50);
}

TEST(References, RightEdgeSubstitutesTopRight) {
  Plane recon(16, 16, 0);
  for (int x = 0; x < 16; ++x) recon.at(x, 7) = static_cast<std::uint8_t>(100 + x);
  const auto r = build_references(recon, 8, 8, 8);
  for (int x = 0; x < 8; ++x) EXPECT_EQ(r.above(x), 108 + x);
  for (int x = 8; x < 16; ++x) EXPECT_EQ(r.above(x), 115);
}

TEST(Predict, FlatReferencesGiveFlatBlockForEveryMode) {
  for (int n : {8, 16})
    for (int v : {0, 37, 128, 255})
      for (int m = 0; m < kNumModes; ++m) {
        const auto pred = predict(IntraMode(m), flat_refs(n, v));
        for (auto s : pred) ASSERT_EQ(s, v) << "mode " << m;
      }
}

TEST(Predict, PureDirections) {
  synth::Rng rng(1);
  const auto r = random_refs(rng, 8);
  const auto ver = predict(kVertical, r), hor = predict(kHorizontal, r);
  const auto m2 = predict(IntraMode(2), r), m34 = predict(IntraMode(34), r), m18 = predict(IntraMode(18), r);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      const auto i = static_cast<std::size_t>(y * 8 + x);
      EXPECT_EQ(ver[i], r.above(x));
      EXPECT_EQ(hor[i], r.side(y));
      EXPECT_EQ(m2[i], r.side(x + y + 1));
      EXPECT_EQ(m34[i], r.above(x + y + 1));
      EXPECT_EQ(m18[i], x >= y ? r.above(x - y - 1) : r.side(y - x - 1));
    }
}

TEST(Predict, DcIsRoundedMean) {
  auto r = flat_refs(8, 0);
  for (int i = 0; i < 8; ++i) {
    r.top[static_cast<std::size_t>(i + 1)] = 10;
    r.left[static_cast<std::size_t>(i)] = 21;
  }
  // (80 + 168 + 8) >> 4 = 16
  for (auto s : predict(kDc, r)) EXPECT_EQ(s, 16);
}

TEST(Predict, PlanarCornerValues) {
  auto r = flat_refs(8, 0);
  r.top[9] = 64;   // p[N][-1]
  r.left[8] = 64;  // p[-1][N]
  const auto pred = predict(kPlanar, r);
  // Bottom-right sample: (0*0 + 8*64 + 0*0 + 8*64 + 8) >> 4 = 64.
  EXPECT_EQ(pred[63], 64);
  EXPECT_EQ(pred[0], (64 + 64 + 8) >> 4);
}

TEST(Predict, AngularMatchesReferenceFormulation) {
  synth::Rng rng(2);
  for (int trial = 0; trial < 40; ++trial)
    for (int n : {8, 16}) {
      const auto r = random_refs(rng, n);
      for (int m = 2; m < kNumModes; ++m) ASSERT_EQ(predict(IntraMode(m), r), oracle_predict(m, r)) << "mode " << m;
    }
}

TEST(Mpm, Examples) {
  EXPECT_EQ(derive_mpm(kDc, kDc), (MpmList{kPlanar, kDc, kVertical}));
  EXPECT_EQ(derive_mpm(IntraMode(10), IntraMode(10)), (MpmList{IntraMode(10), IntraMode(9), IntraMode(11)}));
  EXPECT_EQ(derive_mpm(kPlanar, kVertical), (MpmList{kPlanar, kVertical, kDc}));
  EXPECT_EQ(derive_mpm(IntraMode(2), IntraMode(2)), (MpmList{IntraMode(2), IntraMode(33), IntraMode(3)}));
  EXPECT_EQ(derive_mpm(IntraMode(34), IntraMode(34)), (MpmList{IntraMode(34), IntraMode(33), IntraMode(3)}));
  EXPECT_EQ(derive_mpm(std::nullopt, IntraMode(5)), (MpmList{kDc, IntraMode(5), kPlanar}));
  EXPECT_EQ(derive_mpm(IntraMode(5), IntraMode(7)), (MpmList{IntraMode(5), IntraMode(7), kPlanar}));
}

TEST(Mpm, FlagContext) {
  EXPECT_EQ(mpm_flag_context(false, false), 0);
  EXPECT_EQ(mpm_flag_context(true, false), 1);
  EXPECT_EQ(mpm_flag_context(false, true), 1);
  EXPECT_EQ(mpm_flag_context(true, true), 2);
}

TEST(Mpm, ExhaustiveDistinctAndInRange) {
  for (int a = -1; a < kNumModes; ++a)
    for (int b = -1; b < kNumModes; ++b) {
      std::optional<IntraMode> l, u;
      if (a >= 0) l = IntraMode(a);
      if (b >= 0) u = IntraMode(b);
      const auto m = derive_mpm(l, u);
      std::set<int> s{m[0].value(), m[1].value(), m[2].value()};
      EXPECT_EQ(s.size(), 3u);
    }
}

std::vector<MpmList> derivable_lists() {
  std::set<std::array<int, 3>> seen;
  std::vector<MpmList> out;
  for (int a = -1; a < kNumModes; ++a)
    for (int b = -1; b < kNumModes; ++b) {
      const auto m = derive_mpm(a < 0 ? std::nullopt : std::optional(IntraMode(a)),
                                b < 0 ? std::nullopt : std::optional(IntraMode(b)));
      if (seen.insert({m[0].value(), m[1].value(), m[2].value()}).second) out.push_back(m);
    }
  return out;
}

TEST(Binarization, BijectionAndBinCounts) {
  for (const auto& mpms : derivable_lists())
    for (int ctx = 0; ctx < 3; ++ctx) {
      std::set<std::vector<int>> codewords;
      for (int v = 0; v < kNumModes; ++v) {
        const IntraMode m(v);
        const auto bins = binarize_mode(m, mpms, ctx);
        ASSERT_EQ(bins.front().context, ctx);
        for (std::size_t i = 1; i < bins.size(); ++i) ASSERT_EQ(bins[i].context, kBypass);
        const auto k = mpm_index(m, mpms);
        if (k)
          EXPECT_EQ(bins.size(), *k == 0 ? 2u : 3u);
        else
          EXPECT_EQ(bins.size(), 6u);
        std::vector<int> raw;
        for (const auto& b : bins) raw.push_back(b.bit);
        EXPECT_EQ(debinarize_mode(raw, mpms), m);
        codewords.insert(raw);
      }
      EXPECT_EQ(codewords.size(), 35u);
    }
}

TEST(Binarization, MissRankSkipsMpms) {
  const MpmList mpms{kPlanar, kDc, kVertical};
  const auto bins = binarize_mode(IntraMode(2), mpms, 0);
  std::vector<int> raw;
  for (const auto& b : bins) raw.push_back(b.bit);
  EXPECT_EQ(raw, (std::vector<int>{0, 0, 0, 0, 0, 0}));
  const auto last = binarize_mode(IntraMode(34), mpms, 0);
  raw.clear();
  for (const auto& b : last) raw.push_back(b.bit);
  EXPECT_EQ(raw, (std::vector<int>{0, 1, 1, 1, 1, 1}));
}

TEST(Binarization, MalformedBinStrings) {
  const MpmList mpms{kPlanar, kDc, kVertical};
  const std::vector<int> too_short{0, 1, 1};
  EXPECT_THROW(debinarize_mode(too_short, mpms), FormatError);
  const std::vector<int> trailing{1, 0, 1};
  EXPECT_THROW(debinarize_mode(trailing, mpms), FormatError);
  const std::vector<int> not_binary{1, 2};
  EXPECT_THROW(debinarize_mode(not_binary, mpms), FormatError);
}

TEST(ModeDecision, MatchesBruteForceArgmin) {
  synth::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = trial % 2 ? 8 : 16;
    const auto r = random_refs(rng, n);
    Block original(static_cast<std::size_t>(n) * n);
    if (trial % 3 == 0)
      original = predict(IntraMode(static_cast<int>(rng.integer(0, 34))), r);
    else
      for (auto& s : original) s = static_cast<std::uint8_t>(rng.integer(0, 255));
    std::int64_t best = -1;
    int best_mode = -1;
    for (int m = 0; m < kNumModes; ++m) {
      const auto cost = ssd(original, predict(IntraMode(m), r));
      if (best < 0 || cost < best) best = cost, best_mode = m;
    }
    EXPECT_EQ(mode_decision(original, r).value(), best_mode);
    if (trial % 3 == 0) {
      EXPECT_EQ(best, 0);
    }
  }
}

TEST(ModeDecision, ExactPredictionWins) {
  synth::Rng rng(4);
  const auto r = random_refs(rng, 8);
  EXPECT_EQ(mode_decision(predict(IntraMode(17), r), r), IntraMode(17));
}

TEST(ModeDecision, TiesGoToLowestMode) {
  // Every mode predicts the same flat block, so planar wins.
  EXPECT_EQ(mode_decision(Block(64, 90), flat_refs(8, 90)), kPlanar);
}

}  // namespace
}  // namespace macnn::intra
