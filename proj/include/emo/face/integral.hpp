#pragma once

#include <cstdint>
#include <vector>

#include "emo/core/image.hpp"

namespace emo::face {

/// Summed-area tables of a grayscale image (plain and squared intensities).
///
/// Storage is padded by one zero row/column so any rectangle sum costs four
/// lookups without bounds checks.
class IntegralImage {
 public:
  IntegralImage() = default;
  explicit IntegralImage(const Image& gray);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  /// Sum of pixels in rows 0..row and columns 0..col, inclusive.
  std::uint64_t inclusive(int row, int col) const noexcept { return sum_[idx(row + 1, col + 1)]; }

  std::uint64_t rect_sum(int x, int y, int w, int h) const noexcept {
    return sum_[idx(y + h, x + w)] - sum_[idx(y, x + w)] - sum_[idx(y + h, x)] + sum_[idx(y, x)];
  }
  std::uint64_t rect_sq_sum(int x, int y, int w, int h) const noexcept {
    return sq_[idx(y + h, x + w)] - sq_[idx(y, x + w)] - sq_[idx(y + h, x)] + sq_[idx(y, x)];
  }

 private:
  std::size_t idx(int r, int c) const noexcept {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(width_ + 1) + static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint64_t> sum_;
  std::vector<std::uint64_t> sq_;
};

/// Requires a single-channel image.
IntegralImage integral_image(const Image& gray);

}  // namespace emo::face
