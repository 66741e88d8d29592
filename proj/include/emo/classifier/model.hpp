#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "emo/classifier/recurrent.hpp"
#include "emo/text/embedding.hpp"

namespace emo::classifier {

struct LabeledItem {
  std::string text;
  EmotionLabel label;
};

/// Items plus a stratified train/test partition (indices into `items`).
struct LabeledCorpus {
  std::vector<LabeledItem> items;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.8;

  std::vector<LabeledItem> train_items() const;
  std::vector<LabeledItem> test_items() const;
};

/// Reads a UTF-8 CSV with header `label,text` (RFC 4180 quoting).
std::vector<LabeledItem> read_corpus_csv(const std::filesystem::path& path);
std::vector<LabeledItem> parse_corpus_csv(std::string_view csv);
std::string write_corpus_csv(const std::vector<LabeledItem>& items);

/// Per-class seeded shuffle; the first round(fraction * n_class) go to train.
LabeledCorpus stratified_split(std::vector<LabeledItem> items, double train_fraction,
                               std::uint64_t seed);

struct TrainMeta {
  int epochs = 0;
  std::uint64_t seed = 0;
  double lr = 1e-3;
  int batch = 32;
  double train_fraction = 0.8;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct ClassifierModel {
  RecurrentParams params;
  text::Vocabulary vocab;
  EmbeddingTable embedding;
  int max_len = text::kDefaultMaxLen;
  TrainMeta meta;

  text::EncodedText encode(std::string_view raw) const;
};

struct TrainConfig {
  CellType cell = CellType::Lstm;
  int epochs = 30;
  int hidden_dim = 64;
  int batch = 32;
  int max_len = text::kDefaultMaxLen;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::uint64_t seed = 1;
};

/// Corpus vocabulary restricted to words with vectors, ordered by frequency
/// then lexicographically, plus the matching embedding rows.
ClassifierModel build_untrained_model(const std::vector<LabeledItem>& items,
                                      const text::EmbeddingStore& store, const TrainConfig& cfg);

struct EpochReport {
  int epoch;
  double mean_loss;
  double train_accuracy;
};

/// Minimizes mean cross-entropy over shuffled mini-batches with Adam.
ClassifierModel train(const LabeledCorpus& corpus, const text::EmbeddingStore& store,
                      const TrainConfig& cfg,
                      const std::function<void(const EpochReport&)>& on_epoch = {});

double evaluate(const ClassifierModel& model, const std::vector<LabeledItem>& split);
double evaluate_encoded(const ClassifierModel& model,
                        const std::vector<std::pair<text::EncodedText, EmotionLabel>>& split);

struct Classification {
  EmotionLabel label;
  std::vector<double> probabilities;
  bool low_confidence = false;
};

Classification classify(const ClassifierModel& model, std::string_view raw,
                        double confidence_threshold = 0.25);

inline constexpr std::string_view kModelFormat = "emomodel/1";

void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);
std::string serialize_model(const ClassifierModel& model);
ClassifierModel deserialize_model(std::string_view json_text);

}  // namespace emo::classifier
