#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace emo {

/// 8-bit raster, row-major, interleaved channels (1 = gray, 3 = RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        pixels(static_cast<std::size_t>(w) * h * c, fill) {}

  bool empty() const noexcept { return pixels.empty(); }
  std::size_t index(int x, int y, int ch = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width + x) * channels + ch;
  }
  std::uint8_t& at(int x, int y, int ch = 0) { return pixels[index(x, y, ch)]; }
  std::uint8_t at(int x, int y, int ch = 0) const { return pixels[index(x, y, ch)]; }

  friend bool operator==(const Image&, const Image&) = default;
};

/// BT.601 luma, rounded to the nearest level.
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;
Image to_gray(const Image& img);
Image to_rgb(const Image& img);
Image flip_horizontal(const Image& img);

// Codecs. Decoding accepts PNG and JPEG; encoding always writes PNG.
Image decode_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Image& img);
Image read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);

}  // namespace emo
