#include "emo/service/pipeline.hpp"

#include "emo/core/error.hpp"

namespace emo::service {

namespace {

void require_models(const Models& m) {
  if (!m.classifier) throw Error(Errc::ModelNotLoaded, "emotion classifier is not loaded");
  if (!m.gan) throw Error(Errc::ModelNotLoaded, "GAN checkpoint is not loaded");
}

}  // namespace

TransferResult transfer_emotion_prepped(std::string_view text, const Image& prepped, const Models& models) {
  require_models(models);
  const classifier::Classification c = classifier::classify(*models.classifier, text, models.confidence_threshold);
  const ExpressionDomain d = models.emotion_map.map(c.label);
  return {c.label, c.probabilities, c.low_confidence, d, gan::synthesize(*models.gan, prepped, d)};
}

TransferResult transfer_emotion(std::string_view text, const Image& photo, const Models& models) {
  require_models(models);
  if (!models.cascade) throw Error(Errc::ModelNotLoaded, "face cascade is not loaded");
  return transfer_emotion_prepped(text, face::prep_face(photo, *models.cascade, models.prep), models);
}

Image expression_strip(const gan::GanState& gan, const Image& prepped) {
  const int s = prepped.width;
  Image strip(s * (kNumDomains + 1), s, 3);
  auto paste = [&](const Image& img, int slot) {
    for (int y = 0; y < s; ++y)
      for (int x = 0; x < s; ++x)
        for (int c = 0; c < 3; ++c) strip.at(slot * s + x, y, c) = img.at(x, y, c);
  };
  paste(prepped, 0);
  for (int d = 0; d < kNumDomains; ++d) paste(gan::synthesize(gan, prepped, static_cast<ExpressionDomain>(d)), d + 1);
  return strip;
}

}  // namespace emo::service
