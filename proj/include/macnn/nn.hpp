#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "macnn/error.hpp"
#include "macnn/mode.hpp"
#include "macnn/tensor.hpp"

namespace macnn::nn {

inline constexpr std::size_t kConv1Channels = 32;
inline constexpr std::size_t kConv2Channels = 64;
inline constexpr std::size_t kKernel = 4;
inline constexpr std::size_t kFeatureDim = 919;
inline constexpr std::size_t kConcatDim = kFeatureDim + 3 * kNumModes;  // 1024
static_assert(kConcatDim == 1024);

/// Network output: a strictly positive distribution over the 35 modes.
using ProbDist35 = std::array<float, kNumModes>;

/// The learned parameter set for one block size. Immutable once loaded.
struct ModelWeights {
  int block_size = 8;
  Tensor w1, b1, w2, b2, w3, b3, w4, b4;

  static constexpr std::array<std::string_view, 8> kNames = {"W1", "B1", "W2", "B2", "W3", "B3", "W4", "B4"};

  /// Expected dims of each named tensor for block size n.
  static std::vector<std::size_t> expected_dims(std::string_view name, int n) {
    const auto q = static_cast<std::size_t>(n / 4);
    if (name == "W1") return {kConv1Channels, 3, kKernel, kKernel};
    if (name == "B1") return {kConv1Channels};
    if (name == "W2") return {kConv2Channels, kConv1Channels, kKernel, kKernel};
    if (name == "B2") return {kConv2Channels};
    if (name == "W3") return {kFeatureDim, kConv2Channels * q * q};
    if (name == "B3") return {kFeatureDim};
    if (name == "W4") return {static_cast<std::size_t>(kNumModes), kConcatDim};
    if (name == "B4") return {static_cast<std::size_t>(kNumModes)};
    throw ShapeError("unknown tensor name " + std::string(name));
  }

  Tensor& by_name(std::string_view name) { return const_cast<Tensor&>(std::as_const(*this).by_name(name)); }
  const Tensor& by_name(std::string_view name) const {
    if (name == "W1") return w1;
    if (name == "B1") return b1;
    if (name == "W2") return w2;
    if (name == "B2") return b2;
    if (name == "W3") return w3;
    if (name == "B3") return b3;
    if (name == "W4") return w4;
    if (name == "B4") return b4;
    throw ShapeError("unknown tensor name " + std::string(name));
  }

  /// All-zero weights: the network then predicts the uniform distribution.
  static ModelWeights zeros(int n) {
    check_block_size(n);
    ModelWeights w;
    w.block_size = n;
    for (auto name : kNames) w.by_name(name) = Tensor(expected_dims(name, n));
    return w;
  }

  static void check_block_size(int n) {
    if (n != 8 && n != 16) throw ShapeError("block size must be 8 or 16, got " + std::to_string(n));
  }

  void validate() const {
    check_block_size(block_size);
    for (auto name : kNames) {
      const Tensor& t = by_name(name);
      if (t.dims() != expected_dims(name, block_size))
        throw ShapeError(std::string(name) + " is " + t.dims_string() + ", not the shape required for N=" +
                         std::to_string(block_size));
    }
  }
};

/// "Same" 2-D cross-correlation with a 4x4 kernel. The 3 padding rows/columns
/// are split 1 before and 2 after on each axis.
inline Tensor conv2d_same(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  if (input.rank() != 3) throw ShapeError("conv input must be C x H x W");
  const std::size_t channels = input.dim(0), height = input.dim(1), width = input.dim(2);
  const std::size_t outputs = bias.size();
  if (kernel.size() != outputs * channels * kKernel * kKernel)
    throw ShapeError("kernel " + kernel.dims_string() + " does not match input " + input.dims_string() +
                     " and bias " + bias.dims_string());

  const auto in = input.data();
  const auto w = kernel.data();
  Tensor out({outputs, height, width});
  std::vector<double> acc(height * width);

  for (std::size_t k = 0; k < outputs; ++k) {
    std::fill(acc.begin(), acc.end(), static_cast<double>(bias[k]));
    for (std::size_t c = 0; c < channels; ++c) {
      const float* plane = in.data() + c * height * width;
      const float* taps = w.data() + (k * channels + c) * kKernel * kKernel;
      for (std::size_t dy = 0; dy < kKernel; ++dy) {
        for (std::size_t dx = 0; dx < kKernel; ++dx) {
          const double tap = taps[dy * kKernel + dx];
          if (tap == 0.0) continue;
          // Output x reads input column x + dx - 1.
          const std::ptrdiff_t shift_x = static_cast<std::ptrdiff_t>(dx) - 1;
          const std::ptrdiff_t shift_y = static_cast<std::ptrdiff_t>(dy) - 1;
          const std::size_t x0 = shift_x < 0 ? 1 : 0;
          const auto x1 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(width) - shift_x));
          for (std::size_t y = 0; y < height; ++y) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y) + shift_y;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(height)) continue;
            const float* row = plane + static_cast<std::size_t>(iy) * width;
            double* dst = acc.data() + y * width;
            for (std::size_t x = x0; x < std::min(x1, width); ++x) dst[x] += tap * row[x + shift_x];
          }
        }
      }
    }
    float* o = out.data().data() + k * height * width;
    for (std::size_t i = 0; i < height * width; ++i) o[i] = static_cast<float>(acc[i]);
  }
  return out;
}

inline Tensor relu(Tensor t) {
  for (float& v : t.data()) v = std::max(v, 0.0f);
  return t;
}

/// Disjoint 2x2 max pooling.
inline Tensor maxpool2(const Tensor& t) {
  if (t.rank() != 3) throw ShapeError("maxpool input must be C x H x W");
  const std::size_t channels = t.dim(0), height = t.dim(1), width = t.dim(2);
  if (height % 2 || width % 2) throw ShapeError("maxpool needs even spatial dims, got " + t.dims_string());
  Tensor out({channels, height / 2, width / 2});
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < height / 2; ++y)
      for (std::size_t x = 0; x < width / 2; ++x)
        out.at(c, y, x) = std::max({t.at(c, 2 * y, 2 * x), t.at(c, 2 * y, 2 * x + 1), t.at(c, 2 * y + 1, 2 * x),
                                    t.at(c, 2 * y + 1, 2 * x + 1)});
  return out;
}

/// y = W x + b with W stored rows x cols, row-major.
inline std::vector<float> dense(std::span<const float> x, const Tensor& weights, const Tensor& bias) {
  const std::size_t rows = bias.size();
  if (weights.size() != rows * x.size())
    throw ShapeError("dense weight " + weights.dims_string() + " does not match input length " +
                     std::to_string(x.size()) + " and bias " + bias.dims_string());
  std::vector<float> y(rows);
  const auto w = weights.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const float* row = w.data() + r * x.size();
    double acc = bias[r];
    for (std::size_t j = 0; j < x.size(); ++j) acc += static_cast<double>(row[j]) * x[j];
    y[r] = static_cast<float>(acc);
  }
  return y;
}

/// Numerically stable softmax over 35 logits.
inline ProbDist35 softmax35(std::span<const float> logits) {
  if (logits.size() != static_cast<std::size_t>(kNumModes)) throw ShapeError("softmax35 needs 35 logits");
  for (float v : logits)
    if (!std::isfinite(v)) throw NumericError("non-finite logit");
  const float top = *std::max_element(logits.begin(), logits.end());
  std::array<double, kNumModes> e{};
  double sum = 0.0;
  for (int i = 0; i < kNumModes; ++i) {
    e[i] = std::exp(static_cast<double>(logits[i]) - top);
    sum += e[i];
  }
  ProbDist35 p{};
  for (int i = 0; i < kNumModes; ++i)
    p[i] = std::max(static_cast<float>(e[i] / sum), std::numeric_limits<float>::min());
  return p;
}

/// Natural-log cross-entropy of a single target.
inline double cross_entropy(const ProbDist35& pred, IntraMode target) {
  return -std::log(static_cast<double>(pred[target.value()]));
}

/// Every intermediate activation of one forward pass.
struct ForwardTrace {
  Tensor c1, s2, c3, s4;
  std::vector<float> f, f5, logits;
  ProbDist35 y{};
};

/// Full network evaluation. `context` is 3 x N x N (above-left, above, left),
/// samples scaled to [0, 1]. MPM one-hots are appended to the dense features
/// in list order.
inline ForwardTrace forward_trace(const Tensor& context, const MpmList& mpms, const ModelWeights& w) {
  const auto n = static_cast<std::size_t>(w.block_size);
  if (context.rank() != 3 || context.dim(0) != 3 || context.dim(1) != n || context.dim(2) != n)
    throw ShapeError("context " + context.dims_string() + " does not match weights for N=" + std::to_string(n));
  ForwardTrace t;
  t.c1 = relu(conv2d_same(context, w.w1, w.b1));
  t.s2 = maxpool2(t.c1);
  t.c3 = relu(conv2d_same(t.s2, w.w2, w.b2));
  t.s4 = maxpool2(t.c3);
  t.f = dense(t.s4.data(), w.w3, w.b3);
  for (float& v : t.f) v = std::max(v, 0.0f);
  t.f5 = t.f;
  t.f5.resize(kConcatDim, 0.0f);
  for (std::size_t i = 0; i < mpms.size(); ++i)
    t.f5[kFeatureDim + i * kNumModes + static_cast<std::size_t>(mpms[i].value())] = 1.0f;
  t.logits = dense(t.f5, w.w4, w.b4);
  t.y = softmax35(t.logits);
  return t;
}

inline ProbDist35 forward(const Tensor& context, const MpmList& mpms, const ModelWeights& w) {
  return forward_trace(context, mpms, w).y;
}

}  // namespace macnn::nn
