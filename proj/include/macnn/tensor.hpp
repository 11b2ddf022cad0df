#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "macnn/error.hpp"

namespace macnn {

/// Dense row-major float array of rank 1..4. Rank-3 tensors are laid out
/// channels x height x width; rank 4 is reserved for conv kernels.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> dims, float fill = 0.0f) : dims_(std::move(dims)) {
    check_dims(dims_);
    data_.assign(element_count(dims_), fill);
  }

  Tensor(std::vector<std::size_t> dims, std::vector<float> data) : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims(dims_);
    if (data_.size() != element_count(dims_)) throw ShapeError("data length does not match dims " + dims_string());
  }

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t dim(std::size_t i) const { return dims_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  float& at(std::size_t c, std::size_t y, std::size_t x) { return data_[(c * dims_[1] + y) * dims_[2] + x]; }
  float at(std::size_t c, std::size_t y, std::size_t x) const { return data_[(c * dims_[1] + y) * dims_[2] + x]; }

  /// Same storage viewed with new dims of equal element count.
  Tensor reshaped(std::vector<std::size_t> dims) const& { return Tensor(std::move(dims), data_); }
  Tensor reshaped(std::vector<std::size_t> dims) && { return Tensor(std::move(dims), std::move(data_)); }

  std::string dims_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < dims_.size(); ++i) s += (i ? "x" : "") + std::to_string(dims_[i]);
    return s + "]";
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static std::size_t element_count(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  }
  static void check_dims(const std::vector<std::size_t>& dims) {
    if (dims.empty() || dims.size() > 4) throw ShapeError("tensor rank must be 1..4");
    for (auto d : dims)
      if (d == 0) throw ShapeError("tensor dims must be positive");
  }

  std::vector<std::size_t> dims_;
  std::vector<float> data_;
};

}  // namespace macnn
