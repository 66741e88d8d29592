#pragma once

#include <vector>

#include "emo/core/image.hpp"
#include "emo/face/cascade.hpp"
#include "emo/face/integral.hpp"

namespace emo::face {

struct BoundingBox {
  int x = 0, y = 0, w = 0, h = 0;

  long area() const noexcept { return static_cast<long>(w) * h; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

double iou(const BoundingBox& a, const BoundingBox& b);

/// Intersects `box` with the image rectangle; w or h may come out <= 0.
BoundingBox clamp_box(const BoundingBox& box, int width, int height);

/// Multi-scale sliding window. Scale k uses a window of round(base * s_k),
/// s_k = scale_factor^k, and a step of max(1, round(s_k / 10)) pixels.
std::vector<BoundingBox> detect_candidates(const Image& img, const CascadeModel& cascade,
                                           double scale_factor);
/// Single-threaded reference with identical output.
std::vector<BoundingBox> detect_candidates_serial(const Image& img, const CascadeModel& cascade,
                                                  double scale_factor);

/// Transitive grouping of boxes that each cover >= 50% of the other; groups
/// smaller than `min_neighbors` are dropped; mean boxes sorted by area desc.
std::vector<BoundingBox> group_candidates(const std::vector<BoundingBox>& candidates, int min_neighbors);

std::vector<BoundingBox> detect_faces(const Image& img, const CascadeModel& cascade,
                                      double scale_factor = 1.1, int min_neighbors = 3);

}  // namespace emo::face
