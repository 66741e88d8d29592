#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace emo::nn {

/// Dense NCHW tensor.
template <typename T>
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_, T fill = T(0))
      : n(n_), c(c_), h(h_), w(w_),
        data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

  std::size_t size() const noexcept { return data.size(); }
  std::size_t plane() const noexcept { return static_cast<std::size_t>(h) * w; }
  std::size_t sample_size() const noexcept { return static_cast<std::size_t>(c) * h * w; }

  T* sample(int i) noexcept { return data.data() + static_cast<std::size_t>(i) * sample_size(); }
  const T* sample(int i) const noexcept { return data.data() + static_cast<std::size_t>(i) * sample_size(); }

  std::size_t offset(int ni, int ci, int y, int x) const noexcept {
    return ((static_cast<std::size_t>(ni) * c + ci) * h + y) * w + x;
  }
  T& at(int ni, int ci, int y, int x) noexcept { return data[offset(ni, ci, y, x)]; }
  T at(int ni, int ci, int y, int x) const noexcept { return data[offset(ni, ci, y, x)]; }

  bool same_shape(const Tensor& o) const noexcept { return n == o.n && c == o.c && h == o.h && w == o.w; }
  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(n, c, h, w);
    std::transform(data.begin(), data.end(), out.data.begin(), [](T v) { return static_cast<U>(v); });
    return out;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

}  // namespace emo::nn
