#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "saffn/errors.hpp"

namespace saffn {

/// Extents of a rank-4 (batch, channel, height, width) tensor.
struct Dims {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  [[nodiscard]] std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  [[nodiscard]] std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  [[nodiscard]] bool valid() const { return n >= 1 && c >= 1 && h >= 1 && w >= 1; }
  [[nodiscard]] std::string str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
           std::to_string(w) + ")";
  }
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Dense row-major NCHW tensor. Element (n,c,i,j) lives at ((n*C + c)*H + i)*W + j.
///
/// A default-constructed tensor is the distinguished "empty" value (all dims 0);
/// every other tensor has all dims >= 1 and exactly numel() elements.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Dims dims, T fill = T(0)) : dims_(check(dims)), data_(dims.numel(), fill) {}

  Tensor(Dims dims, std::vector<T> data) : dims_(check(dims)), data_(std::move(data)) {
    if (data_.size() != dims_.numel()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match dims " + dims_.str());
    }
  }

  static Tensor zeros(Dims dims) { return Tensor(dims, T(0)); }
  static Tensor full(Dims dims, T value) { return Tensor(dims, value); }

  [[nodiscard]] bool empty() const { return data_.empty(); }
  [[nodiscard]] const Dims& dims() const { return dims_; }
  [[nodiscard]] int n() const { return dims_.n; }
  [[nodiscard]] int c() const { return dims_.c; }
  [[nodiscard]] int h() const { return dims_.h; }
  [[nodiscard]] int w() const { return dims_.w; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  [[nodiscard]] T* data() { return data_.data(); }
  [[nodiscard]] const T* data() const { return data_.data(); }
  [[nodiscard]] std::span<T> span() { return data_; }
  [[nodiscard]] std::span<const T> span() const { return data_; }
  [[nodiscard]] std::vector<T>& storage() { return data_; }
  [[nodiscard]] const std::vector<T>& storage() const { return data_; }

  [[nodiscard]] std::size_t offset(int n, int c, int i, int j) const {
    return ((static_cast<std::size_t>(n) * dims_.c + c) * dims_.h + i) * dims_.w + j;
  }
  T& at(int n, int c, int i, int j) { return data_[offset(n, c, i, j)]; }
  const T& at(int n, int c, int i, int j) const { return data_[offset(n, c, i, j)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T* plane(int n, int c) { return data_.data() + offset(n, c, 0, 0); }
  const T* plane(int n, int c) const { return data_.data() + offset(n, c, 0, 0); }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  /// Same values with a different element type (used by the 64-bit verification path).
  template <typename U>
  [[nodiscard]] Tensor<U> cast() const {
    if (empty()) return {};
    std::vector<U> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(), [](T v) { return static_cast<U>(v); });
    return Tensor<U>(dims_, std::move(out));
  }

  /// Reinterprets the same element count under new dims.
  [[nodiscard]] Tensor reshaped(Dims dims) const& { return Tensor(dims, data_); }
  [[nodiscard]] Tensor reshaped(Dims dims) && { return Tensor(dims, std::move(data_)); }

 private:
  static Dims check(Dims d) {
    if (!d.valid()) throw ShapeError("tensor dims must all be >= 1, got " + d.str());
    return d;
  }

  Dims dims_{};
  std::vector<T> data_;
};

inline void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (a != b) throw ShapeError(std::string(what) + ": dims " + a.str() + " vs " + b.str());
}

}  // namespace saffn
