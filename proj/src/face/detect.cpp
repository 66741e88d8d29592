#include "emo/face/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "emo/core/error.hpp"

namespace emo::face {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const long ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const long iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const long inter = ix * iy;
  const long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

BoundingBox clamp_box(const BoundingBox& box, int width, int height) {
  const int x0 = std::clamp(box.x, 0, width);
  const int y0 = std::clamp(box.y, 0, height);
  const int x1 = std::clamp(box.x + box.w, 0, width);
  const int y1 = std::clamp(box.y + box.h, 0, height);
  return {x0, y0, x1 - x0, y1 - y0};
}

namespace {

struct ScaledRect {
  int x, y, w, h;
  double weight;
};

struct ScaledWeak {
  ScaledRect rects[3];
  int n_rects;
  double threshold, left, right;
};

struct ScaledStage {
  double threshold;
  std::vector<ScaledWeak> weak;
};

/// Cascade features rescaled to one window size, with rectangle weights
/// re-balanced so every feature stays zero-sum after rounding.
struct ScaledCascade {
  int win_w, win_h, step;
  int norm_x, norm_y, norm_w, norm_h;
  double inv_norm_area;
  std::vector<ScaledStage> stages;
};

int iround(double v) { return static_cast<int>(std::lround(v)); }

ScaledCascade scale_cascade(const CascadeModel& c, double scale) {
  ScaledCascade s;
  s.win_w = iround(c.window_w * scale);
  s.win_h = iround(c.window_h * scale);
  s.step = std::max(1, iround(scale / 10.0));
  s.norm_x = iround(scale);
  s.norm_y = iround(scale);
  s.norm_w = std::max(1, iround((c.window_w - 2) * scale));
  s.norm_h = std::max(1, iround((c.window_h - 2) * scale));
  s.inv_norm_area = 1.0 / (static_cast<double>(s.norm_w) * s.norm_h);
  s.stages.reserve(c.stages.size());
  for (const auto& st : c.stages) {
    ScaledStage ss{st.threshold, {}};
    ss.weak.reserve(st.weak.size());
    for (const auto& w : st.weak) {
      ScaledWeak sw{};
      sw.n_rects = static_cast<int>(w.rects.size());
      sw.threshold = w.threshold;
      sw.left = w.left;
      sw.right = w.right;
      double others = 0.0;
      for (int k = 0; k < sw.n_rects; ++k) {
        const auto& r = w.rects[static_cast<std::size_t>(k)];
        ScaledRect& t = sw.rects[k];
        t.x = iround(r.x * scale);
        t.y = iround(r.y * scale);
        t.w = std::max(1, iround(r.w * scale));
        t.h = std::max(1, iround(r.h * scale));
        t.weight = r.weight * s.inv_norm_area;
        if (k > 0) others += t.weight * t.w * t.h;
      }
      sw.rects[0].weight = -others / (static_cast<double>(sw.rects[0].w) * sw.rects[0].h);
      ss.weak.push_back(sw);
    }
    s.stages.push_back(std::move(ss));
  }
  return s;
}

bool window_passes(const IntegralImage& ii, const ScaledCascade& sc, int x, int y) {
  const double sum = static_cast<double>(ii.rect_sum(x + sc.norm_x, y + sc.norm_y, sc.norm_w, sc.norm_h));
  const double sq = static_cast<double>(ii.rect_sq_sum(x + sc.norm_x, y + sc.norm_y, sc.norm_w, sc.norm_h));
  const double mean = sum * sc.inv_norm_area;
  const double var = sq * sc.inv_norm_area - mean * mean;
  const double norm = var > 0.0 ? std::sqrt(var) : 1.0;
  for (const auto& st : sc.stages) {
    double stage_sum = 0.0;
    for (const auto& w : st.weak) {
      double value = 0.0;
      for (int k = 0; k < w.n_rects; ++k) {
        const auto& r = w.rects[k];
        value += r.weight * static_cast<double>(ii.rect_sum(x + r.x, y + r.y, r.w, r.h));
      }
      stage_sum += value < w.threshold * norm ? w.left : w.right;
    }
    if (stage_sum < st.threshold) return false;
  }
  return true;
}

std::vector<ScaledCascade> pyramid(const Image& img, const CascadeModel& cascade, double scale_factor) {
  if (!(scale_factor > 1.0)) throw Error(Errc::BadConfig, "scale_factor must exceed 1");
  std::vector<ScaledCascade> levels;
  for (double scale = 1.0;; scale *= scale_factor) {
    const int w = iround(cascade.window_w * scale);
    const int h = iround(cascade.window_h * scale);
    if (w > img.width || h > img.height) break;
    levels.push_back(scale_cascade(cascade, scale));
  }
  return levels;
}

}  // namespace

std::vector<BoundingBox> detect_candidates_serial(const Image& img, const CascadeModel& cascade,
                                                  double scale_factor) {
  const Image gray = to_gray(img);
  const IntegralImage ii(gray);
  std::vector<BoundingBox> out;
  for (const auto& sc : pyramid(gray, cascade, scale_factor)) {
    for (int y = 0; y + sc.win_h <= gray.height; y += sc.step)
      for (int x = 0; x + sc.win_w <= gray.width; x += sc.step)
        if (window_passes(ii, sc, x, y)) out.push_back({x, y, sc.win_w, sc.win_h});
  }
  return out;
}

std::vector<BoundingBox> detect_candidates(const Image& img, const CascadeModel& cascade,
                                           double scale_factor) {
  const Image gray = to_gray(img);
  const IntegralImage ii(gray);
  std::vector<BoundingBox> out;
  for (const auto& sc : pyramid(gray, cascade, scale_factor)) {
    const int rows = (gray.height - sc.win_h) / sc.step + 1;
    std::vector<std::vector<BoundingBox>> per_row(static_cast<std::size_t>(rows));
#pragma omp parallel for schedule(dynamic, 4)
    for (int r = 0; r < rows; ++r) {
      const int y = r * sc.step;
      for (int x = 0; x + sc.win_w <= gray.width; x += sc.step)
        if (window_passes(ii, sc, x, y)) per_row[static_cast<std::size_t>(r)].push_back({x, y, sc.win_w, sc.win_h});
    }
    for (auto& row : per_row) out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

std::vector<BoundingBox> group_candidates(const std::vector<BoundingBox>& cands, int min_neighbors) {
  const std::size_t n = cands.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = cands[i];
      const auto& b = cands[j];
      const long ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
      const long iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
      const long inter = ix * iy;
      if (2 * inter >= a.area() && 2 * inter >= b.area()) parent[find(i)] = find(j);
    }
  }
  struct Acc {
    double x = 0, y = 0, w = 0, h = 0;
    int count = 0;
  };
  std::vector<Acc> acc(n);
  for (std::size_t i = 0; i < n; ++i) {
    Acc& a = acc[find(i)];
    a.x += cands[i].x;
    a.y += cands[i].y;
    a.w += cands[i].w;
    a.h += cands[i].h;
    ++a.count;
  }
  std::vector<BoundingBox> out;
  for (const auto& a : acc) {
    if (a.count == 0 || a.count < min_neighbors) continue;
    out.push_back({iround(a.x / a.count), iround(a.y / a.count), iround(a.w / a.count),
                   iround(a.h / a.count)});
  }
  std::sort(out.begin(), out.end(), [](const BoundingBox& a, const BoundingBox& b) {
    if (a.area() != b.area()) return a.area() > b.area();
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  return out;
}

std::vector<BoundingBox> detect_faces(const Image& img, const CascadeModel& cascade,
                                      double scale_factor, int min_neighbors) {
  if (min_neighbors < 0) throw Error(Errc::BadConfig, "min_neighbors must be >= 0");
  return group_candidates(detect_candidates(img, cascade, scale_factor), min_neighbors);
}

}  // namespace emo::face
