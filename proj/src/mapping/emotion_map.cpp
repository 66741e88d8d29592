#include "emo/mapping/emotion_map.hpp"

#include <toml.hpp>

#include "emo/core/error.hpp"

namespace emo::mapping {

EmotionMap::EmotionMap()
    : table_{ExpressionDomain::Happiness, ExpressionDomain::Sadness, ExpressionDomain::Anger, ExpressionDomain::Fear,
             ExpressionDomain::Sadness,   ExpressionDomain::Disgust, ExpressionDomain::Surprise} {}

EmotionMap EmotionMap::from_entries(const std::map<std::string, std::string>& entries) {
  EmotionMap m;
  std::array<bool, kNumEmotions> seen{};
  for (const auto& [key, value] : entries) {
    const auto e = parse_emotion(key);
    if (!e) throw Error(Errc::BadConfig, "emotion_map: unknown emotion '" + key + "'");
    const auto d = parse_domain(value);
    if (!d) throw Error(Errc::BadConfig, "emotion_map: unknown expression domain '" + value + "' for " + key);
    m.table_[static_cast<std::size_t>(code(*e))] = *d;
    seen[static_cast<std::size_t>(code(*e))] = true;
  }
  for (int i = 0; i < kNumEmotions; ++i)
    if (!seen[static_cast<std::size_t>(i)])
      throw Error(Errc::BadConfig,
                  "emotion_map: missing entry for '" + std::string(kEmotionNames[static_cast<std::size_t>(i)]) + "'");
  return m;
}

EmotionMap EmotionMap::from_toml(std::string_view toml_text) {
  toml::table doc;
  try {
    doc = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw Error(Errc::BadConfig, std::string("config parse error: ") + std::string(e.description()));
  }
  const toml::node* node = doc.get("emotion_map");
  if (!node) return EmotionMap{};
  const toml::table* table = node->as_table();
  if (!table) throw Error(Errc::BadConfig, "emotion_map must be a table");
  std::map<std::string, std::string> entries;
  for (const auto& [key, value] : *table) {
    const auto s = value.value<std::string>();
    if (!value.is_string() || !s) throw Error(Errc::BadConfig, "emotion_map." + std::string(key.str()) + " must be a string");
    entries[std::string(key.str())] = *s;
  }
  return from_entries(entries);
}

ExpressionDomain map_emotion(EmotionLabel e) noexcept {
  static const EmotionMap kDefault;
  return kDefault.map(e);
}

}  // namespace emo::mapping
