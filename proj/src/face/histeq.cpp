#include <array>
#include <cmath>
#include <optional>

#include "emo/face/preprocess.hpp"

namespace emo::face {
namespace {

using Lut = std::array<std::uint8_t, 256>;

// Returns nullopt for single-level histograms (denominator zero).
std::optional<Lut> equalization_lut(const std::array<std::uint64_t, 256>& hist, std::uint64_t n) {
  std::uint64_t cdf_min = 0;
  for (auto h : hist) {
    if (h) {
      cdf_min = h;
      break;
    }
  }
  if (n == cdf_min) return std::nullopt;
  const std::uint64_t den = n - cdf_min;
  Lut lut{};
  std::uint64_t cdf = 0;
  for (int v = 0; v < 256; ++v) {
    cdf += hist[static_cast<std::size_t>(v)];
    const std::uint64_t num = cdf > cdf_min ? (cdf - cdf_min) * 255 : 0;
    // round half up in integer arithmetic
    lut[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>((2 * num + den) / (2 * den));
  }
  return lut;
}

Image luma_plane(const Image& img) { return img.channels == 1 ? img : to_gray(img); }

std::uint8_t scale_channel(std::uint8_t c, std::uint8_t y, std::uint8_t y_new) {
  const long v = std::lround(static_cast<double>(c) * y_new / y);
  return static_cast<std::uint8_t>(std::min(v, 255L));
}

template <bool Parallel>
Image equalize_impl(const Image& img) {
  const Image y = luma_plane(img);
  const std::size_t n = y.pixels.size();
  std::array<std::uint64_t, 256> hist{};
  for (auto v : y.pixels) ++hist[v];
  const auto lut = equalization_lut(hist, n);
  if (!lut) return img;
  Image out(img.width, img.height, img.channels);
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (img.channels == 1) {
#pragma omp parallel for schedule(static) if (Parallel)
    for (std::ptrdiff_t i = 0; i < count; ++i) out.pixels[static_cast<std::size_t>(i)] = (*lut)[y.pixels[static_cast<std::size_t>(i)]];
    return out;
  }
#pragma omp parallel for schedule(static) if (Parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const std::uint8_t l = y.pixels[k];
    for (int c = 0; c < 3; ++c) {
      out.pixels[k * 3 + static_cast<std::size_t>(c)] =
          l == 0 ? 0 : scale_channel(img.pixels[k * 3 + static_cast<std::size_t>(c)], l, (*lut)[l]);
    }
  }
  return out;
}

}  // namespace

Image histogram_equalize(const Image& img) { return equalize_impl<true>(img); }
Image histogram_equalize_serial(const Image& img) { return equalize_impl<false>(img); }

}  // namespace emo::face
