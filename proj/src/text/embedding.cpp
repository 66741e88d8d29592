#include "emo/text/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "emo/core/error.hpp"
#include "emo/core/io.hpp"

namespace emo::text {

EmbeddingStore::EmbeddingStore(int dim, std::vector<std::string> words,
                               std::vector<double> word_rows)
    : dim_(dim), words_(std::move(words)) {
  const auto d = static_cast<std::size_t>(dim_);
  matrix_.assign(2 * d, 0.0);
  matrix_.insert(matrix_.end(), word_rows.begin(), word_rows.end());
  if (!words_.empty()) {
    for (std::size_t r = 0; r < words_.size(); ++r)
      for (std::size_t j = 0; j < d; ++j) matrix_[d + j] += word_rows[r * d + j];
    for (std::size_t j = 0; j < d; ++j) matrix_[d + j] /= static_cast<double>(words_.size());
  }
  for (std::size_t r = 0; r < words_.size(); ++r) {
    word_to_row_.emplace(words_[r], static_cast<int>(r + 2));
  }
}

int EmbeddingStore::row_of(std::string_view word) const {
  auto it = word_to_row_.find(std::string(word));
  return it == word_to_row_.end() ? -1 : it->second;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

EmbeddingStore parse_vectors(std::string_view text) {
  int dim = -1;
  std::vector<std::string> words;
  std::vector<double> rows;
  std::unordered_map<std::string, bool> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    const int count = static_cast<int>(fields.size()) - 1;
    if (dim < 0) {
      if (count < 1) throw MalformedLineError(line_no, "no vector components");
      dim = count;
    }
    if (count != dim) {
      throw MalformedLineError(line_no, "expected " + std::to_string(dim) + " values, got " +
                                            std::to_string(count));
    }
    std::vector<double> vec(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
      const auto f = fields[static_cast<std::size_t>(j) + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), vec[static_cast<std::size_t>(j)]);
      if (ec != std::errc() || ptr != f.data() + f.size() ||
          !std::isfinite(vec[static_cast<std::size_t>(j)])) {
        throw MalformedLineError(line_no, "bad number '" + std::string(f) + "'");
      }
    }
    std::string word(fields[0]);
    if (seen.emplace(word, true).second) {
      words.push_back(std::move(word));
      rows.insert(rows.end(), vec.begin(), vec.end());
    }
  }
  if (dim < 0) throw MalformedLineError(0, "empty vector file");
  return EmbeddingStore(dim, std::move(words), std::move(rows));
}

EmbeddingStore load_vectors(const std::filesystem::path& path) {
  return parse_vectors(read_text_file(path));
}

std::vector<std::vector<double>> embed(const EmbeddingStore& store, const EncodedText& ids) {
  std::vector<std::vector<double>> out;
  out.reserve(ids.ids.size());
  for (int id : ids.ids) {
    const auto r = store.row(static_cast<std::size_t>(id));
    out.emplace_back(r.begin(), r.end());
  }
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<std::pair<std::string, double>> nearest_words(const EmbeddingStore& store,
                                                          std::string_view word, int k) {
  const int query = store.row_of(word);
  if (query < 0) throw Error(Errc::UnknownWord, "unknown word '" + std::string(word) + "'");
  const auto q = store.row(static_cast<std::size_t>(query));
  const auto& words = store.words();
  std::vector<std::pair<std::string, double>> scored(words.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < words.size(); ++i) {
    scored[i] = {words[i], cosine_similarity(q, store.row(i + 2))};
  }
  std::erase_if(scored, [&](const auto& p) { return p.first == word; });
  const auto keep = std::min(scored.size(), static_cast<std::size_t>(std::max(k, 0)));
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    [](const auto& a, const auto& b) {
                      return a.second != b.second ? a.second > b.second : a.first < b.first;
                    });
  scored.resize(keep);
  return scored;
}

}  // namespace emo::text
