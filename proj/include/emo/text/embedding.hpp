#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "emo/text/normalizer.hpp"

namespace emo::text {

/// Pre-trained word vectors. Rows 0 and 1 are `<pad>` (zeros) and `<unk>`
/// (mean of all loaded vectors); loaded words follow in file order.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(int dim, std::vector<std::string> words, std::vector<double> word_rows);

  int dim() const noexcept { return dim_; }
  /// Number of loaded words (excludes the two sentinel rows).
  std::size_t vocab_size() const noexcept { return words_.size(); }
  std::size_t rows() const noexcept { return words_.size() + 2; }

  std::span<const double> row(std::size_t r) const {
    return {matrix_.data() + r * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  int row_of(std::string_view word) const;  // -1 when absent
  bool contains(std::string_view word) const { return row_of(word) >= 0; }
  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::vector<double>& matrix() const noexcept { return matrix_; }

 private:
  int dim_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> word_to_row_;
  std::vector<double> matrix_;
};

/// Parses the whitespace-separated `word v1 ... vd` text format (GloVe layout).
EmbeddingStore load_vectors(const std::filesystem::path& path);
EmbeddingStore parse_vectors(std::string_view text);

/// Row gather; padding ids produce zero vectors. Output has ids.max_len() rows.
std::vector<std::vector<double>> embed(const EmbeddingStore& store, const EncodedText& ids);

std::vector<std::pair<std::string, double>> nearest_words(const EmbeddingStore& store,
                                                          std::string_view word, int k);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace emo::text
