#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace emo {

/// Face expression domains the generator can impose. Codes 0..6 are fixed.
enum class ExpressionDomain : int { Anger = 0, Disgust, Fear, Happiness, Neutral, Sadness, Surprise };

inline constexpr int kNumDomains = 7;

inline constexpr std::array<std::string_view, kNumDomains> kDomainNames = {
    "anger", "disgust", "fear", "happiness", "neutral", "sadness", "surprise"};

constexpr std::string_view to_string(ExpressionDomain d) { return kDomainNames[static_cast<int>(d)]; }
constexpr int code(ExpressionDomain d) { return static_cast<int>(d); }

constexpr std::optional<ExpressionDomain> parse_domain(std::string_view name) {
  for (int i = 0; i < kNumDomains; ++i)
    if (kDomainNames[static_cast<std::size_t>(i)] == name) return static_cast<ExpressionDomain>(i);
  return std::nullopt;
}

}  // namespace emo
