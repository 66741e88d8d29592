#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "emo/core/image.hpp"
#include "emo/face/cascade.hpp"
#include "emo/face/detect.hpp"

namespace emo::face {

inline constexpr int kFaceSize = 128;

/// Bilinear resample of `box` (clamped to the image) to out_size x out_size RGB,
/// sampling at half-pixel centers with edge replication inside the box.
Image crop_resize(const Image& img, const BoundingBox& box, int out_size = kFaceSize);

/// Serial reference for the per-pixel luminance mapping; same result as
/// histogram_equalize.
Image histogram_equalize_serial(const Image& img);

/// CDF remap h(v) = round((cdf(v) - cdf_min) / (N - cdf_min) * 255). RGB
/// images equalize BT.601 luma and rescale each channel by Y'/Y.
/// Images with a single luminance level come back unchanged.
Image histogram_equalize(const Image& img);

struct PrepConfig {
  double scale_factor = 1.1;
  int min_neighbors = 3;
  double expand = 0.10;  // fraction of box size added on each side
  int size = kFaceSize;
};

BoundingBox expand_box(const BoundingBox& box, double fraction, int width, int height);

/// Detect, take the largest face, expand, crop to size x size x 3, equalize.
Image prep_face(const Image& img, const CascadeModel& cascade, const PrepConfig& cfg = {});

struct SkipRecord {
  std::string file;
  std::string reason;
};

struct DatasetManifest {
  std::map<std::string, int> counts;  // every domain name present, possibly 0
  std::vector<SkipRecord> skipped;
  std::string cascade_sha256;
  PrepConfig params;
  int total() const;
};

/// Preps every image under raw_dir/<domain>/ into out_dir/<domain>/<stem>.png
/// and writes out_dir/manifest.json.
DatasetManifest build_dataset(const std::filesystem::path& raw_dir, const CascadeModel& cascade,
                              const std::filesystem::path& out_dir, const PrepConfig& cfg = {});

}  // namespace emo::face
