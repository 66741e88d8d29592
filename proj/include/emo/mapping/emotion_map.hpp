#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>

#include "emo/classifier/labels.hpp"
#include "emo/gan/domain.hpp"

namespace emo::mapping {

/// Total EmotionLabel -> ExpressionDomain table. Immutable once built.
class EmotionMap {
 public:
  /// happy->happiness, shame->sadness, every other label to its namesake.
  EmotionMap();

  /// All 7 emotion names must appear exactly once with a valid domain name;
  /// anything else throws BadConfig.
  static EmotionMap from_entries(const std::map<std::string, std::string>& entries);

  /// Reads the optional `[emotion_map]` table of a TOML document; defaults
  /// when the table is absent. Throws BadConfig on parse errors or a
  /// non-total table.
  static EmotionMap from_toml(std::string_view toml_text);

  ExpressionDomain map(EmotionLabel e) const noexcept { return table_[static_cast<std::size_t>(code(e))]; }

  friend bool operator==(const EmotionMap&, const EmotionMap&) = default;

 private:
  std::array<ExpressionDomain, kNumEmotions> table_;
};

/// Lookup in the default table.
ExpressionDomain map_emotion(EmotionLabel e) noexcept;

}  // namespace emo::mapping
