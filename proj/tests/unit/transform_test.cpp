#include <gtest/gtest.h>

#include <cmath>

#include "macnn/transform.hpp"
#include "test_util.hpp"

namespace macnn::transform {
namespace {

TEST(Quant, StepSizes) {
  EXPECT_DOUBLE_EQ(QuantConfig(4).qstep(), 1.0);
  EXPECT_DOUBLE_EQ(QuantConfig(10).qstep(), 2.0);
  EXPECT_DOUBLE_EQ(QuantConfig(22).qstep(), 8.0);
  EXPECT_NEAR(QuantConfig(32).qstep(), std::exp2(28.0 / 6.0), 1e-12);
  EXPECT_THROW(QuantConfig(52), UsageError);
  EXPECT_THROW(QuantConfig(-1), UsageError);
}

TEST(DctTest, BasisIsOrthonormal) {
  for (int n : {8, 16}) {
    const Dct dct(n);
    // Transforming unit impulses gives the basis; check C C^T = I via energy and roundtrip.
    synth::Rng rng(n);
    std::vector<double> x(static_cast<std::size_t>(n) * n);
    for (double& v : x) v = rng.uniform(-255, 255);
    const auto c = dct.forward(x);
    double ex = 0, ec = 0;
    for (std::size_t i = 0; i < x.size(); ++i) ex += x[i] * x[i], ec += c[i] * c[i];
    EXPECT_NEAR(ex, ec, 1e-6 * ex);
    const auto back = dct.inverse(c);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-9);
  }
}

TEST(DctTest, FlatBlockHasOnlyDc) {
  const Dct dct(8);
  const auto c = dct.forward(std::vector<double>(64, 3.0));
  EXPECT_NEAR(c[0], 24.0, 1e-12);  // 3 * 8
  for (std::size_t i = 1; i < 64; ++i) EXPECT_NEAR(c[i], 0.0, 1e-12);
}

TEST(TransformQuant, ZeroResidualGivesZeroLevels) {
  const Dct dct(8);
  const std::vector<int> zero(64, 0);
  for (auto l : transform_quant(dct, zero, QuantConfig(32))) EXPECT_EQ(l, 0);
}

TEST(TransformQuant, FlatResidualMapsToDcLevel) {
  const Dct dct(8);
  // A flat residual r has DC coefficient 8r; the qp 22 step is 8 and the qp 34 step is 32.
  for (int r : {-13, -5, -1, 1, 5, 13}) {
    const std::vector<int> res(64, r);
    const auto fine = transform_quant(dct, res, QuantConfig(22));
    EXPECT_EQ(fine[0], r);
    for (std::size_t i = 1; i < 64; ++i) EXPECT_EQ(fine[i], 0);
    EXPECT_EQ(transform_quant(dct, res, QuantConfig(34))[0], static_cast<int>(std::lround(r / 4.0)));
  }
}

TEST(TransformQuant, UnitStepIsLosslessForIntegerCoefficients) {
  const Dct dct(8);
  const QuantConfig q(4);
  for (int r : {-7, 0, 3, 100}) {
    const std::vector<int> res(64, r);
    EXPECT_EQ(dequant_inverse(dct, transform_quant(dct, res, q), q), res);
  }
}

TEST(TransformQuant, LowQpIsNearLossless) {
  synth::Rng rng(1);
  const Dct dct(16);
  std::vector<int> res(256);
  for (int& v : res) v = static_cast<int>(rng.integer(-60, 60));
  const QuantConfig q(0);
  const auto back = dequant_inverse(dct, transform_quant(dct, res, q), q);
  for (std::size_t i = 0; i < res.size(); ++i) EXPECT_LE(std::abs(back[i] - res[i]), 1);
}

TEST(TransformQuant, ErrorShrinksWithQp) {
  synth::Rng rng(2);
  const Dct dct(8);
  std::vector<int> res(64);
  for (int& v : res) v = static_cast<int>(rng.integer(-100, 100));
  double prev = 1e300;
  for (int qp : {37, 32, 27, 22, 12}) {
    const QuantConfig q(qp);
    const auto back = dequant_inverse(dct, transform_quant(dct, res, q), q);
    double err = 0;
    for (std::size_t i = 0; i < 64; ++i) err += (back[i] - res[i]) * (back[i] - res[i]);
    EXPECT_LE(err, prev);
    prev = err;
  }
}

}  // namespace
}  // namespace macnn::transform
