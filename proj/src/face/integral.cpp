#include "emo/face/integral.hpp"

#include "emo/core/error.hpp"

namespace emo::face {

IntegralImage::IntegralImage(const Image& gray) : width_(gray.width), height_(gray.height) {
  if (gray.channels != 1) throw Error(Errc::BadShape, "integral image needs a grayscale image");
  const std::size_t n = static_cast<std::size_t>(width_ + 1) * static_cast<std::size_t>(height_ + 1);
  sum_.assign(n, 0);
  sq_.assign(n, 0);
  for (int y = 0; y < height_; ++y) {
    std::uint64_t row = 0;
    std::uint64_t row_sq = 0;
    for (int x = 0; x < width_; ++x) {
      const std::uint64_t v = gray.at(x, y);
      row += v;
      row_sq += v * v;
      sum_[idx(y + 1, x + 1)] = sum_[idx(y, x + 1)] + row;
      sq_[idx(y + 1, x + 1)] = sq_[idx(y, x + 1)] + row_sq;
    }
  }
}

IntegralImage integral_image(const Image& gray) { return IntegralImage(gray); }

}  // namespace emo::face
