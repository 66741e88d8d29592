#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace emo {

/// Text-side emotion classes; the integer codes are part of the model format.
enum class EmotionLabel : int { Happy = 0, Sadness, Anger, Fear, Shame, Disgust, Surprise };

inline constexpr int kNumEmotions = 7;

inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "happy", "sadness", "anger", "fear", "shame", "disgust", "surprise"};

constexpr std::string_view to_string(EmotionLabel e) { return kEmotionNames[static_cast<int>(e)]; }
constexpr int code(EmotionLabel e) { return static_cast<int>(e); }

constexpr std::optional<EmotionLabel> parse_emotion(std::string_view name) {
  for (int i = 0; i < kNumEmotions; ++i)
    if (kEmotionNames[static_cast<std::size_t>(i)] == name) return static_cast<EmotionLabel>(i);
  return std::nullopt;
}

}  // namespace emo
