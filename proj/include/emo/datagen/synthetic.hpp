#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emo/classifier/model.hpp"
#include "emo/core/image.hpp"
#include "emo/gan/domain.hpp"

namespace emo::datagen {

/// Template sentences, `per_class` per emotion, no duplicate texts.
std::vector<classifier::LabeledItem> synthetic_corpus(std::uint64_t seed, int per_class = 100);

/// GloVe-format text: one word per line followed by `dim` floats. Covers
/// every token the corpus templates can produce plus some filler words.
/// Emotion keywords share a per-class direction.
std::string synthetic_vectors(std::uint64_t seed, int dim = 50);

/// A cartoon face with the given expression, size x size RGB.
Image draw_face(ExpressionDomain d, std::uint64_t seed, int size = 64);

/// Writes `<dir>/<domain>/<domain>_NNN.png`, `per_domain` faces each.
void write_face_set(const std::filesystem::path& dir, int per_domain, std::uint64_t seed, int size = 64);

}  // namespace emo::datagen
