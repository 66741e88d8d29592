#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace emo::face {

struct HaarRect {
  int x = 0, y = 0, w = 0, h = 0;
  double weight = 0.0;
};

/// Decision stump over one Haar-like feature.
struct WeakClassifier {
  std::vector<HaarRect> rects;
  double threshold = 0.0;
  double left = 0.0;   // taken when feature < threshold * stddev
  double right = 0.0;
};

struct Stage {
  double threshold = 0.0;
  std::vector<WeakClassifier> weak;
};

struct CascadeModel {
  int window_w = 0;
  int window_h = 0;
  std::vector<Stage> stages;
  std::string sha256;  // of the source file bytes
};

/// Parses the stump-based BOOST/HAAR cascade XML written by OpenCV's trainer.
CascadeModel load_cascade(const std::filesystem::path& path);
CascadeModel parse_cascade(const std::string& xml);

}  // namespace emo::face
