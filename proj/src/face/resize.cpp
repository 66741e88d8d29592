#include <algorithm>
#include <cmath>

#include "emo/core/error.hpp"
#include "emo/face/preprocess.hpp"

namespace emo::face {

Image crop_resize(const Image& img, const BoundingBox& box, int out_size) {
  const BoundingBox b = clamp_box(box, img.width, img.height);
  if (b.w <= 0 || b.h <= 0) throw Error(Errc::DegenerateBox, "crop box is empty after clamping");
  if (out_size <= 0) throw Error(Errc::BadShape, "output size must be positive");
  const Image src = to_rgb(img);
  Image out(out_size, out_size, 3);
  const double sx = static_cast<double>(b.w) / out_size;
  const double sy = static_cast<double>(b.h) / out_size;
#pragma omp parallel for schedule(static)
  for (int oy = 0; oy < out_size; ++oy) {
    const double fy = std::clamp((oy + 0.5) * sy - 0.5, 0.0, static_cast<double>(b.h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, b.h - 1);
    const double wy = fy - y0;
    for (int ox = 0; ox < out_size; ++ox) {
      const double fx = std::clamp((ox + 0.5) * sx - 0.5, 0.0, static_cast<double>(b.w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, b.w - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - wx) * src.at(b.x + x0, b.y + y0, c) + wx * src.at(b.x + x1, b.y + y0, c);
        const double bot = (1.0 - wx) * src.at(b.x + x0, b.y + y1, c) + wx * src.at(b.x + x1, b.y + y1, c);
        const double v = (1.0 - wy) * top + wy * bot;
        out.at(ox, oy, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

BoundingBox expand_box(const BoundingBox& box, double fraction, int width, int height) {
  const int dx = static_cast<int>(std::lround(box.w * fraction));
  const int dy = static_cast<int>(std::lround(box.h * fraction));
  return clamp_box({box.x - dx, box.y - dy, box.w + 2 * dx, box.h + 2 * dy}, width, height);
}

}  // namespace emo::face
