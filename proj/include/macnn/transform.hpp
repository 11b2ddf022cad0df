#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "macnn/error.hpp"

namespace macnn::transform {

/// Quantizer step for a QP; doubles every 6 QP steps, 1.0 at QP 4.
struct QuantConfig {
  int qp = 32;

  explicit QuantConfig(int q) : qp(q) {
    if (q < 0 || q > 51) throw UsageError("qp must be in 0..51");
  }
  double qstep() const { return std::exp2((qp - 4) / 6.0); }
};

/// Orthonormal DCT-II basis, row k = frequency k.
class Dct {
 public:
  explicit Dct(int n) : n_(n), basis_(static_cast<std::size_t>(n) * n) {
    for (int k = 0; k < n; ++k) {
      const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
      for (int i = 0; i < n; ++i)
        basis_[static_cast<std::size_t>(k) * n + i] = scale * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
    }
  }

  int size() const { return n_; }

  /// coef = C X C^T, row-major N x N in and out.
  std::vector<double> forward(std::span<const double> x) const { return apply(x, false); }
  /// X = C^T coef C.
  std::vector<double> inverse(std::span<const double> coef) const { return apply(coef, true); }

 private:
  double c(int k, int i) const { return basis_[static_cast<std::size_t>(k) * n_ + i]; }

  std::vector<double> apply(std::span<const double> in, bool transpose) const {
    const auto n = static_cast<std::size_t>(n_);
    if (in.size() != n * n) throw InternalError("transform input has the wrong size");
    auto m = [&](std::size_t a, std::size_t b) {
      return transpose ? c(static_cast<int>(b), static_cast<int>(a)) : c(static_cast<int>(a), static_cast<int>(b));
    };
    std::vector<double> tmp(n * n, 0.0), out(n * n, 0.0);
    // Rows first: tmp = in * M^T, then columns: out = M * tmp.
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += in[y * n + i] * m(k, i);
        tmp[y * n + k] = s;
      }
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t x = 0; x < n; ++x) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += m(k, i) * tmp[i * n + x];
        out[k * n + x] = s;
      }
    return out;
  }

  int n_;
  std::vector<double> basis_;
};

/// Residual (original - prediction) to quantized levels; rounding is half away from zero.
inline std::vector<std::int32_t> transform_quant(const Dct& dct, std::span<const int> residual, const QuantConfig& q) {
  std::vector<double> x(residual.begin(), residual.end());
  const auto coef = dct.forward(x);
  const double step = q.qstep();
  std::vector<std::int32_t> levels(coef.size());
  for (std::size_t i = 0; i < coef.size(); ++i) levels[i] = static_cast<std::int32_t>(std::round(coef[i] / step));
  return levels;
}

/// Levels back to a spatial residual, rounded to integers.
inline std::vector<int> dequant_inverse(const Dct& dct, std::span<const std::int32_t> levels, const QuantConfig& q) {
  const double step = q.qstep();
  std::vector<double> coef(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) coef[i] = levels[i] * step;
  const auto x = dct.inverse(coef);
  std::vector<int> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<int>(std::round(x[i]));
  return out;
}

}  // namespace macnn::transform
