#include "emo/classifier/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>

#include "emo/core/error.hpp"
#include "emo/core/io.hpp"
#include "emo/optim/adam.hpp"

namespace emo::classifier {

using nlohmann::json;

std::vector<LabeledItem> LabeledCorpus::train_items() const {
  std::vector<LabeledItem> out;
  for (auto i : train) out.push_back(items[i]);
  return out;
}

std::vector<LabeledItem> LabeledCorpus::test_items() const {
  std::vector<LabeledItem> out;
  for (auto i : test) out.push_back(items[i]);
  return out;
}

namespace {

std::vector<std::vector<std::string>> parse_csv_records(std::string_view s) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < s.size() && s[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < s.size() && s[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        records.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw Error(Errc::BadCorpus, "unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    records.push_back(std::move(row));
  }
  return records;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::vector<LabeledItem> parse_corpus_csv(std::string_view csv) {
  auto records = parse_csv_records(csv);
  if (records.empty()) throw Error(Errc::BadCorpus, "corpus has no header");
  auto& header = records.front();
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  if (header.size() != 2 || header[0] != "label" || header[1] != "text") {
    throw Error(Errc::BadCorpus, "corpus header must be 'label,text'");
  }
  std::vector<LabeledItem> items;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != 2) {
      throw Error(Errc::BadCorpus, "record " + std::to_string(r + 1) + " has " +
                                       std::to_string(rec.size()) + " fields");
    }
    const auto label = parse_emotion(rec[0]);
    if (!label) throw Error(Errc::BadCorpus, "unknown label '" + rec[0] + "'");
    items.push_back({rec[1], *label});
  }
  return items;
}

std::vector<LabeledItem> read_corpus_csv(const std::filesystem::path& path) {
  return parse_corpus_csv(read_text_file(path));
}

std::string write_corpus_csv(const std::vector<LabeledItem>& items) {
  std::string out = "label,text\n";
  for (const auto& it : items) {
    out += to_string(it.label);
    out += ',';
    out += csv_quote(it.text);
    out += '\n';
  }
  return out;
}

LabeledCorpus stratified_split(std::vector<LabeledItem> items, double train_fraction,
                               std::uint64_t seed) {
  LabeledCorpus corpus;
  corpus.items = std::move(items);
  corpus.split_seed = seed;
  corpus.train_fraction = train_fraction;
  std::mt19937_64 rng(seed);
  for (int cls = 0; cls < kNumEmotions; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < corpus.items.size(); ++i)
      if (code(corpus.items[i].label) == cls) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(idx.size())));
    corpus.train.insert(corpus.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    corpus.test.insert(corpus.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(corpus.train.begin(), corpus.train.end());
  std::sort(corpus.test.begin(), corpus.test.end());
  return corpus;
}

text::EncodedText ClassifierModel::encode(std::string_view raw) const {
  return text::encode(text::normalize(raw), vocab, max_len);
}

ClassifierModel build_untrained_model(const std::vector<LabeledItem>& items,
                                      const text::EmbeddingStore& store, const TrainConfig& cfg) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& it : items)
    for (auto& tok : text::normalize(it.text)) ++counts[tok];
  std::vector<std::pair<std::string, std::int64_t>> ranked;
  for (auto& [w, n] : counts)
    if (store.contains(w)) ranked.emplace_back(w, n);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  ClassifierModel model;
  model.max_len = cfg.max_len;
  for (const auto& [w, n] : ranked) model.vocab.add(w, n);
  model.embedding.dim = store.dim();
  model.embedding.rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.vocab.size()), store.dim());
  const auto unk = store.row(1);
  for (int j = 0; j < store.dim(); ++j) model.embedding.rows(1, j) = unk[static_cast<std::size_t>(j)];
  for (const auto& w : model.vocab.words()) {
    const auto r = store.row(static_cast<std::size_t>(store.row_of(w)));
    const int id = model.vocab.id(w);
    for (int j = 0; j < store.dim(); ++j) model.embedding.rows(id, j) = r[static_cast<std::size_t>(j)];
  }
  model.params = RecurrentParams::zeros(cfg.cell, store.dim(), cfg.hidden_dim);
  std::mt19937_64 rng(cfg.seed);
  init_uniform(model.params, rng);
  model.meta.seed = cfg.seed;
  model.meta.lr = cfg.lr;
  model.meta.batch = cfg.batch;
  return model;
}

double evaluate_encoded(const ClassifierModel& model,
                        const std::vector<std::pair<text::EncodedText, EmotionLabel>>& split) {
  if (split.empty()) throw Error(Errc::EmptySplit, "evaluation split is empty");
  std::vector<int> hit(split.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < split.size(); ++i) {
    const auto probs = forward(model.params, model.embedding, split[i].first);
    hit[i] = argmax(probs) == code(split[i].second) ? 1 : 0;
  }
  const int correct = std::accumulate(hit.begin(), hit.end(), 0);
  return static_cast<double>(correct) / static_cast<double>(split.size());
}

double evaluate(const ClassifierModel& model, const std::vector<LabeledItem>& split) {
  if (split.empty()) throw Error(Errc::EmptySplit, "evaluation split is empty");
  std::vector<std::pair<text::EncodedText, EmotionLabel>> enc;
  enc.reserve(split.size());
  for (const auto& it : split) enc.emplace_back(model.encode(it.text), it.label);
  return evaluate_encoded(model, enc);
}

ClassifierModel train(const LabeledCorpus& corpus, const text::EmbeddingStore& store,
                      const TrainConfig& cfg, const std::function<void(const EpochReport&)>& on_epoch) {
  if (corpus.items.empty() || corpus.train.empty()) {
    throw Error(Errc::EmptyCorpus, "training corpus is empty");
  }
  ClassifierModel model = build_untrained_model(corpus.items, store, cfg);
  model.meta.train_fraction = corpus.train_fraction;

  std::vector<std::pair<text::EncodedText, EmotionLabel>> train_set;
  for (auto i : corpus.train)
    train_set.emplace_back(model.encode(corpus.items[i].text), corpus.items[i].label);

  const optim::AdamConfig adam{cfg.lr, cfg.beta1, cfg.beta2, 1e-8};
  std::vector<optim::AdamMoments<double>> moments;
  for (auto& [name, t] : model.params.tensors()) moments.emplace_back(t.size());

  const int batch = std::max(cfg.batch, 1);
  std::vector<RecurrentParams> slot_grads(static_cast<std::size_t>(batch),
                                          RecurrentParams::zeros(cfg.cell, store.dim(), cfg.hidden_dim));
  std::vector<double> slot_loss(static_cast<std::size_t>(batch));
  RecurrentParams total = RecurrentParams::zeros(cfg.cell, store.dim(), cfg.hidden_dim);

  // Shuffling draws from a stream separate from the initializer's.
  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(train_set.size());
  long step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch)) {
      const std::size_t n = std::min(order.size() - start, static_cast<std::size_t>(batch));
      const double scale = 1.0 / static_cast<double>(n);
#pragma omp parallel for schedule(static)
      for (std::size_t s = 0; s < n; ++s) {
        slot_grads[s].set_zero();
        const auto& [enc, label] = train_set[order[start + s]];
        slot_loss[s] = loss_and_gradient(model.params, model.embedding, enc, label, slot_grads[s], scale);
      }
      total.set_zero();
      for (std::size_t s = 0; s < n; ++s) {
        total.W += slot_grads[s].W;
        total.U += slot_grads[s].U;
        total.b += slot_grads[s].b;
        total.Wy += slot_grads[s].Wy;
        total.by += slot_grads[s].by;
        epoch_loss += slot_loss[s];
      }
      ++step;
      auto params = model.params.tensors();
      const auto grads = std::as_const(total).tensors();
      for (std::size_t k = 0; k < params.size(); ++k) {
        optim::adam_step<double>(params[k].second, grads[k].second, moments[k], step, adam);
      }
    }
    if (on_epoch) {
      on_epoch({epoch, epoch_loss / static_cast<double>(train_set.size()),
                evaluate_encoded(model, train_set)});
    }
  }
  model.meta.epochs = cfg.epochs;
  model.meta.train_accuracy = evaluate_encoded(model, train_set);
  if (!corpus.test.empty()) model.meta.test_accuracy = evaluate(model, corpus.test_items());
  return model;
}

Classification classify(const ClassifierModel& model, std::string_view raw, double confidence_threshold) {
  const text::EncodedText enc = model.encode(raw);
  // Nothing to read: uniform, so the tie-break gives code 0 and the flag is set.
  const Eigen::VectorXd probs = enc.length == 0
                                    ? Eigen::VectorXd::Constant(kNumEmotions, 1.0 / kNumEmotions)
                                    : forward(model.params, model.embedding, enc);
  Classification out;
  out.label = static_cast<EmotionLabel>(argmax(probs));
  out.probabilities.assign(probs.data(), probs.data() + probs.size());
  out.low_confidence = probs.maxCoeff() < confidence_threshold;
  return out;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> rm;
  rm.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) rm.push_back(m(r, c));
  return json{{"shape", {m.rows(), m.cols()}}, {"data", rm}};
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
  const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 2 || shape[0] != rows || shape[1] != cols ||
      data.size() != static_cast<std::size_t>(rows * cols)) {
    throw Error(Errc::BadModel, "tensor '" + name + "' has the wrong shape");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
  return m;
}

}  // namespace

std::string serialize_model(const ClassifierModel& model) {
  const auto& p = model.params;
  json labels = json::array();
  for (auto name : kEmotionNames) labels.push_back(std::string(name));
  json words = json::array();
  json freq = json::array();
  for (const auto& w : model.vocab.words()) {
    words.push_back(w);
    freq.push_back(model.vocab.frequency(w));
  }
  json ids = json::array();
  for (const auto& w : model.vocab.words()) ids.push_back(model.vocab.id(w));
  json j = {
      {"format", kModelFormat},
      {"cell", to_string(p.cell)},
      {"input_dim", p.input_dim},
      {"hidden_dim", p.hidden_dim},
      {"max_len", model.max_len},
      {"dim", model.embedding.dim},
      {"label_order", labels},
      {"vocab", {{"words", words}, {"ids", ids}, {"freq", freq}}},
      {"embedding", matrix_to_json(model.embedding.rows)},
      {"tensors",
       {{"W", matrix_to_json(p.W)},
        {"U", matrix_to_json(p.U)},
        {"b", matrix_to_json(p.b)},
        {"Wy", matrix_to_json(p.Wy)},
        {"by", matrix_to_json(p.by)}}},
      {"train_meta",
       {{"epochs", model.meta.epochs},
        {"seed", model.meta.seed},
        {"lr", model.meta.lr},
        {"batch", model.meta.batch},
        {"train_fraction", model.meta.train_fraction},
        {"train_accuracy", model.meta.train_accuracy},
        {"test_accuracy", model.meta.test_accuracy}}},
  };
  return j.dump() + "\n";
}

ClassifierModel deserialize_model(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(Errc::BadModel, std::string("model is not valid JSON: ") + e.what());
  }
  try {
    const auto format = j.at("format").get<std::string>();
    if (format != kModelFormat) {
      throw Error(Errc::VersionMismatch, "expected " + std::string(kModelFormat) + ", got " + format);
    }
    const auto labels = j.at("label_order").get<std::vector<std::string>>();
    if (labels.size() != kEmotionNames.size() ||
        !std::equal(labels.begin(), labels.end(), kEmotionNames.begin())) {
      throw Error(Errc::BadModel, "label order differs from the canonical order");
    }
    ClassifierModel m;
    m.max_len = j.at("max_len").get<int>();
    const int D = j.at("input_dim").get<int>();
    const int H = j.at("hidden_dim").get<int>();
    m.params = RecurrentParams::zeros(parse_cell(j.at("cell").get<std::string>()), D, H);
    const int G = m.params.gates() * H;
    const auto& t = j.at("tensors");
    m.params.W = matrix_from_json(t.at("W"), G, D, "W");
    m.params.U = matrix_from_json(t.at("U"), G, H, "U");
    m.params.b = matrix_from_json(t.at("b"), G, 1, "b");
    m.params.Wy = matrix_from_json(t.at("Wy"), kNumEmotions, H, "Wy");
    m.params.by = matrix_from_json(t.at("by"), kNumEmotions, 1, "by");

    const auto& v = j.at("vocab");
    const auto words = v.at("words").get<std::vector<std::string>>();
    const auto ids = v.at("ids").get<std::vector<int>>();
    const auto freq = v.at("freq").get<std::vector<std::int64_t>>();
    if (ids.size() != words.size() || freq.size() != words.size()) {
      throw Error(Errc::BadModel, "vocabulary arrays differ in length");
    }
    std::map<std::string, int> idmap;
    std::map<std::string, std::int64_t> fmap;
    for (std::size_t i = 0; i < words.size(); ++i) {
      idmap[words[i]] = ids[i];
      fmap[words[i]] = freq[i];
    }
    m.vocab = text::Vocabulary::from_ids(idmap, fmap);
    m.embedding.dim = j.at("dim").get<int>();
    if (m.embedding.dim != D) throw Error(Errc::BadModel, "embedding dim differs from input dim");
    m.embedding.rows = matrix_from_json(j.at("embedding"), static_cast<Eigen::Index>(m.vocab.size()), D, "embedding");

    const auto& meta = j.at("train_meta");
    m.meta.epochs = meta.at("epochs").get<int>();
    m.meta.seed = meta.at("seed").get<std::uint64_t>();
    m.meta.lr = meta.at("lr").get<double>();
    m.meta.batch = meta.at("batch").get<int>();
    m.meta.train_fraction = meta.at("train_fraction").get<double>();
    m.meta.train_accuracy = meta.at("train_accuracy").get<double>();
    m.meta.test_accuracy = meta.at("test_accuracy").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::BadModel, std::string("malformed model: ") + e.what());
  }
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

ClassifierModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_text_file(path));
}

}  // namespace emo::classifier
