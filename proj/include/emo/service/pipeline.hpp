#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "emo/classifier/model.hpp"
#include "emo/face/preprocess.hpp"
#include "emo/gan/trainer.hpp"
#include "emo/mapping/emotion_map.hpp"

namespace emo::service {

/// Read-only inference state shared by every request.
struct Models {
  std::shared_ptr<const classifier::ClassifierModel> classifier;
  std::shared_ptr<const gan::GanState> gan;
  std::shared_ptr<const face::CascadeModel> cascade;
  face::PrepConfig prep;
  mapping::EmotionMap emotion_map;
  double confidence_threshold = 0.25;
};

struct TransferResult {
  EmotionLabel emotion;
  std::vector<double> probabilities;
  bool low_confidence = false;
  ExpressionDomain domain;
  Image face;  // 128x128x3
};

/// classify(text), prep_face(photo), synthesize with the mapped domain.
/// Throws ModelNotLoaded, NoFaceDetected.
TransferResult transfer_emotion(std::string_view text, const Image& photo, const Models& models);

/// Same, for a face that has already been through prep_face.
TransferResult transfer_emotion_prepped(std::string_view text, const Image& prepped, const Models& models);

/// Input photo followed by one synthesis per domain, left to right.
Image expression_strip(const gan::GanState& gan, const Image& prepped);

}  // namespace emo::service
