#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "lggnet/error.hpp"
#include "lggnet/rng.hpp"

namespace lggnet {

using Shape = std::vector<std::size_t>;

/// Number of elements described by a shape. Empty shape counts as zero.
inline std::size_t shape_size(const Shape& shape) {
  if (shape.empty()) return 0;
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

/// "254 x 254 x 16" style rendering.
inline std::string shape_string(const Shape& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += " x ";
    out += std::to_string(shape[i]);
  }
  return out;
}

inline void check_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("shape must have at least one extent");
  for (std::size_t extent : shape) {
    if (extent == 0) throw ShapeError("shape [" + shape_string(shape) + "] has a zero extent");
  }
}

/// Dense row-major array. Images and feature maps use (H, W, C) order.
template <typename T>
class Tensor {
  static_assert(std::is_floating_point_v<T>, "Tensor holds real scalars");

 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(shape_size(shape_), T{0});
  }

  Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != shape_size(shape_)) {
      throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape [" +
                       shape_string(shape_) + "]");
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  /// Element (y, x, c) of a rank-3 tensor.
  T& at(std::size_t y, std::size_t x, std::size_t c) {
    return data_[(y * shape_[1] + x) * shape_[2] + c];
  }
  const T& at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * shape_[1] + x) * shape_[2] + c];
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  /// In-place reshape; element order is unchanged.
  void reshape(Shape new_shape) {
    check_shape(new_shape);
    if (shape_size(new_shape) != data_.size()) {
      throw ShapeError("cannot reshape [" + shape_string(shape_) + "] to [" +
                       shape_string(new_shape) + "]");
    }
    shape_ = std::move(new_shape);
  }

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

template <typename T>
Tensor<T> zeros(Shape shape) {
  return Tensor<T>(std::move(shape));
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& t, Shape new_shape) {
  Tensor<T> out = t;
  out.reshape(std::move(new_shape));
  return out;
}

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
  if constexpr (std::is_same_v<To, From>) {
    return t;
  } else {
    std::vector<To> data(t.size());
    std::transform(t.values().begin(), t.values().end(), data.begin(),
                   [](From v) { return static_cast<To>(v); });
    return Tensor<To>(t.shape(), std::move(data));
  }
}

/// a[m,k] x b[k,n] -> [m,n]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0)) {
    throw ShapeError("matmul: cannot multiply [" + shape_string(a.shape()) + "] by [" +
                     shape_string(b.shape()) + "]");
  }
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  Tensor<T> out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    T* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T lhs = a[i * k + p];
      const T* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += lhs * brow[j];
    }
  }
  return out;
}

template <typename T>
Tensor<T> rand_uniform(Rng& rng, Shape shape, double lo, double hi) {
  if (!(lo < hi)) throw ConfigError("rand_uniform: lower bound must be below upper bound");
  Tensor<T> out(std::move(shape));
  for (T& v : out.values()) v = static_cast<T>(rng.uniform(lo, hi));
  return out;
}

template <typename T>
Tensor<T> rand_normal(Rng& rng, Shape shape, double mean, double stddev) {
  if (!(stddev >= 0.0)) throw ConfigError("rand_normal: stddev must be non-negative");
  Tensor<T> out(std::move(shape));
  for (T& v : out.values()) v = static_cast<T>(mean + stddev * rng.normal());
  return out;
}

}  // namespace lggnet
