#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "emo/core/error.hpp"
#include "emo/datagen/synthetic.hpp"

namespace emo::datagen {
namespace {

struct Rgb {
  double r, g, b;
};

Rgb mix(const Rgb& a, const Rgb& b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

double seg_dist(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  const double t = len2 > 0 ? std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0) : 0.0;
  const double qx = ax + t * dx - px, qy = ay + t * dy - py;
  return std::sqrt(qx * qx + qy * qy);
}

bool in_ellipse(double px, double py, double cx, double cy, double rx, double ry) {
  const double u = (px - cx) / rx, v = (py - cy) / ry;
  return u * u + v * v <= 1.0;
}

// Expression parameters, all in face-relative units.
struct Expression {
  double eye_open;     // eye height scale
  double brow_in;      // inner brow end offset (+ = down)
  double brow_out;     // outer brow end offset
  double mouth_curve;  // + = smile (center below the corners)
  double mouth_width;
  double mouth_tilt;   // right corner offset (+ = up)
  double mouth_open_w; // > 0 draws an open mouth ellipse instead of a line
  double mouth_open_h;
  bool nose_wrinkle;
};

Expression expression_for(ExpressionDomain d) {
  switch (d) {
    case ExpressionDomain::Anger:
      return {0.8, 0.05, -0.015, -0.01, 0.10, 0.0, 0, 0, false};
    case ExpressionDomain::Disgust:
      return {0.55, 0.025, 0.02, -0.02, 0.10, 0.035, 0, 0, true};
    case ExpressionDomain::Fear:
      return {1.6, -0.05, -0.03, 0.0, 0.0, 0.0, 0.09, 0.035, false};
    case ExpressionDomain::Happiness:
      return {0.7, -0.01, -0.01, 0.06, 0.15, 0.0, 0, 0, false};
    case ExpressionDomain::Neutral:
      return {1.0, 0.0, 0.0, 0.0, 0.11, 0.0, 0, 0, false};
    case ExpressionDomain::Sadness:
      return {0.9, -0.045, 0.015, -0.05, 0.12, 0.0, 0, 0, false};
    case ExpressionDomain::Surprise:
      return {1.7, -0.06, -0.06, 0.0, 0.0, 0.0, 0.055, 0.075, false};
  }
  return {};
}

}  // namespace

Image draw_face(ExpressionDomain d, std::uint64_t seed, int size) {
  if (size < 8) throw Error(Errc::BadShape, "face size must be at least 8");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto jit = [&](double a) { return (u01(rng) * 2.0 - 1.0) * a; };

  static constexpr std::array<Rgb, 5> kSkin = {
      {{236, 200, 170}, {214, 170, 130}, {180, 130, 95}, {140, 95, 65}, {250, 220, 195}}};
  static constexpr std::array<Rgb, 4> kHair = {{{40, 30, 25}, {90, 60, 30}, {170, 130, 70}, {20, 20, 20}}};
  const Rgb skin = kSkin[static_cast<std::size_t>(u01(rng) * kSkin.size()) % kSkin.size()];
  const Rgb hair = kHair[static_cast<std::size_t>(u01(rng) * kHair.size()) % kHair.size()];
  const Rgb bg_top{60 + u01(rng) * 150, 60 + u01(rng) * 150, 60 + u01(rng) * 150};
  const Rgb bg_bot{60 + u01(rng) * 150, 60 + u01(rng) * 150, 60 + u01(rng) * 150};
  const Rgb lip{150 + jit(20), 60 + jit(15), 60 + jit(15)};
  const Rgb dark{35, 25, 25};

  const double cx = 0.5 + jit(0.03), cy = 0.53 + jit(0.03);
  const double s = 1.0 + jit(0.06);
  const double head_rx = 0.32 * s, head_ry = 0.40 * s;
  const Expression e = expression_for(d);
  const double eye_y = cy - 0.08 * s, eye_dx = 0.13 * s;
  const double eye_rx = 0.06 * s, eye_ry = 0.032 * s * e.eye_open;
  const double brow_y = eye_y - 0.075 * s - (e.eye_open - 1.0) * 0.02 * s;
  const double mouth_y = cy + 0.2 * s + jit(0.01);
  const double gaze = jit(0.015);

  constexpr int kSub = 4;
  Image img(size, size, 3);
  for (int py = 0; py < size; ++py) {
    for (int px = 0; px < size; ++px) {
      Rgb acc{0, 0, 0};
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const double x = (px + (sx + 0.5) / kSub) / size;
          const double y = (py + (sy + 0.5) / kSub) / size;
          Rgb c = mix(bg_top, bg_bot, y);
          if (in_ellipse(x, y, cx, cy - 0.06 * s, head_rx * 1.08, head_ry * 1.0) && y < cy - 0.12 * s) c = hair;
          if (in_ellipse(x, y, cx, cy, head_rx, head_ry)) {
            c = mix(skin, Rgb{skin.r * 0.8, skin.g * 0.8, skin.b * 0.8}, std::clamp((y - cy) / head_ry, 0.0, 1.0) * 0.5);
            if (y < cy - head_ry * 0.72) c = hair;
            for (int side = -1; side <= 1; side += 2) {
              const double ex = cx + side * eye_dx;
              if (in_ellipse(x, y, ex, eye_y, eye_rx, eye_ry)) {
                c = {245, 245, 240};
                if (in_ellipse(x, y, ex + gaze, eye_y, 0.024 * s, std::min(0.024 * s, eye_ry))) c = dark;
              }
              // Brow: outer end at ex + side*0.075, inner end at ex - side*0.06.
              const double ox = ex + side * 0.075 * s, ix = ex - side * 0.06 * s;
              if (seg_dist(x, y, ox, brow_y + e.brow_out * s, ix, brow_y + e.brow_in * s) < 0.016 * s)
                c = mix(hair, dark, 0.5);
            }
            if (seg_dist(x, y, cx, cy - 0.02 * s, cx - 0.02 * s, cy + 0.08 * s) < 0.008 * s ||
                seg_dist(x, y, cx - 0.02 * s, cy + 0.08 * s, cx + 0.025 * s, cy + 0.085 * s) < 0.008 * s)
              c = mix(skin, dark, 0.45);
            if (e.nose_wrinkle) {
              for (int side = -1; side <= 1; side += 2)
                if (seg_dist(x, y, cx + side * 0.03 * s, cy + 0.01 * s, cx + side * 0.07 * s, cy + 0.04 * s) <
                    0.007 * s)
                  c = mix(skin, dark, 0.5);
            }
            if (e.mouth_open_w > 0) {
              if (in_ellipse(x, y, cx, mouth_y, e.mouth_open_w * s, e.mouth_open_h * s)) c = lip;
              if (in_ellipse(x, y, cx, mouth_y, e.mouth_open_w * s * 0.75, e.mouth_open_h * s * 0.7)) c = dark;
            } else {
              const double hw = e.mouth_width * s;
              const double t = (x - cx) / hw;
              if (t >= -1.0 && t <= 1.0) {
                const double my = mouth_y + e.mouth_curve * s * (1.0 - t * t) - e.mouth_curve * s * 0.5 -
                                  e.mouth_tilt * s * (t + 1.0) * 0.5;
                if (std::abs(y - my) < 0.014 * s) c = lip;
              }
            }
          }
          acc.r += c.r;
          acc.g += c.g;
          acc.b += c.b;
        }
      }
      constexpr double n = kSub * kSub;
      img.at(px, py, 0) = static_cast<std::uint8_t>(std::clamp(std::lround(acc.r / n), 0L, 255L));
      img.at(px, py, 1) = static_cast<std::uint8_t>(std::clamp(std::lround(acc.g / n), 0L, 255L));
      img.at(px, py, 2) = static_cast<std::uint8_t>(std::clamp(std::lround(acc.b / n), 0L, 255L));
    }
  }
  return img;
}

void write_face_set(const std::filesystem::path& dir, int per_domain, std::uint64_t seed, int size) {
  std::mt19937_64 rng(seed);
  for (int d = 0; d < kNumDomains; ++d) {
    const std::string name(kDomainNames[static_cast<std::size_t>(d)]);
    std::filesystem::create_directories(dir / name);
    for (int i = 0; i < per_domain; ++i) {
      char file[64];
      std::snprintf(file, sizeof file, "%s_%03d.png", name.c_str(), i);
      write_png(dir / name / file, draw_face(static_cast<ExpressionDomain>(d), rng(), size));
    }
  }
}

}  // namespace emo::datagen
