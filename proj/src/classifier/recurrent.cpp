#include "emo/classifier/recurrent.hpp"

#include <algorithm>
#include <cmath>

#include "emo/core/error.hpp"

namespace emo::classifier {

std::string_view to_string(CellType cell) { return cell == CellType::Lstm ? "lstm" : "rnn"; }

CellType parse_cell(std::string_view name) {
  if (name == "lstm") return CellType::Lstm;
  if (name == "rnn") return CellType::Rnn;
  throw Error(Errc::BadModel, "unknown cell type '" + std::string(name) + "'");
}

RecurrentParams RecurrentParams::zeros(CellType cell, int input_dim, int hidden_dim) {
  RecurrentParams p;
  p.cell = cell;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  const int g = p.gates() * hidden_dim;
  p.W = Eigen::MatrixXd::Zero(g, input_dim);
  p.U = Eigen::MatrixXd::Zero(g, hidden_dim);
  p.b = Eigen::VectorXd::Zero(g);
  p.Wy = Eigen::MatrixXd::Zero(kNumEmotions, hidden_dim);
  p.by = Eigen::VectorXd::Zero(kNumEmotions);
  return p;
}

std::vector<std::pair<std::string, std::span<double>>> RecurrentParams::tensors() {
  auto view = [](auto& m) { return std::span<double>(m.data(), static_cast<std::size_t>(m.size())); };
  return {{"W", view(W)}, {"U", view(U)}, {"b", view(b)}, {"Wy", view(Wy)}, {"by", view(by)}};
}

std::vector<std::pair<std::string, std::span<const double>>> RecurrentParams::tensors() const {
  auto view = [](const auto& m) {
    return std::span<const double>(m.data(), static_cast<std::size_t>(m.size()));
  };
  return {{"W", view(W)}, {"U", view(U)}, {"b", view(b)}, {"Wy", view(Wy)}, {"by", view(by)}};
}

std::size_t RecurrentParams::parameter_count() const {
  return static_cast<std::size_t>(W.size() + U.size() + b.size() + Wy.size() + by.size());
}

void RecurrentParams::set_zero() {
  W.setZero();
  U.setZero();
  b.setZero();
  Wy.setZero();
  by.setZero();
}

void RecurrentParams::check_shapes() const {
  const int g = gates() * hidden_dim;
  if (W.rows() != g || W.cols() != input_dim || U.rows() != g || U.cols() != hidden_dim ||
      b.size() != g || Wy.rows() != kNumEmotions || Wy.cols() != hidden_dim ||
      by.size() != kNumEmotions) {
    throw Error(Errc::ShapeMismatch, "recurrent parameter shapes are inconsistent");
  }
}

void init_uniform(RecurrentParams& p, std::mt19937_64& rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(p.hidden_dim));
  std::uniform_real_distribution<double> dist(-k, k);
  for (auto& [name, t] : p.tensors())
    for (double& v : t) v = dist(rng);
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

struct StepCache {
  Eigen::VectorXd x, h_prev, c_prev;
  Eigen::VectorXd i, f, o, g;  // LSTM gate activations (g doubles as the RNN output)
  Eigen::VectorXd tanh_c;
};

}  // namespace

CellState lstm_step(const Eigen::VectorXd& x, const CellState& prev, const RecurrentParams& p) {
  const int H = p.hidden_dim;
  if (p.cell != CellType::Lstm || x.size() != p.input_dim || prev.h.size() != H || prev.c.size() != H) {
    throw Error(Errc::ShapeMismatch, "lstm_step: shape mismatch");
  }
  const Eigen::VectorXd z = p.W * x + p.U * prev.h + p.b;
  const Eigen::VectorXd i = sigmoid(z.segment(0, H));
  const Eigen::VectorXd f = sigmoid(z.segment(H, H));
  const Eigen::VectorXd o = sigmoid(z.segment(2 * H, H));
  const Eigen::VectorXd g = z.segment(3 * H, H).array().tanh();
  CellState next;
  next.c = f.cwiseProduct(prev.c) + i.cwiseProduct(g);
  next.h = o.cwiseProduct(next.c.array().tanh().matrix());
  return next;
}

CellState rnn_step(const Eigen::VectorXd& x, const CellState& prev, const RecurrentParams& p) {
  if (p.cell != CellType::Rnn || x.size() != p.input_dim || prev.h.size() != p.hidden_dim) {
    throw Error(Errc::ShapeMismatch, "rnn_step: shape mismatch");
  }
  CellState next;
  next.h = (p.W * x + p.U * prev.h + p.b).array().tanh();
  next.c = Eigen::VectorXd::Zero(p.hidden_dim);
  return next;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double mx = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - mx).exp();
  return e / e.sum();
}

namespace {

Eigen::VectorXd final_hidden(const RecurrentParams& p, const EmbeddingTable& emb,
                             const text::EncodedText& enc, std::vector<StepCache>* caches) {
  const int H = p.hidden_dim;
  CellState s{Eigen::VectorXd::Zero(H), Eigen::VectorXd::Zero(H)};
  if (caches) caches->reserve(static_cast<std::size_t>(enc.length));
  for (int t = 0; t < enc.length; ++t) {
    Eigen::VectorXd x = emb.row(enc.ids[static_cast<std::size_t>(t)]);
    if (!caches) {
      s = p.cell == CellType::Lstm ? lstm_step(x, s, p) : rnn_step(x, s, p);
      continue;
    }
    StepCache sc;
    sc.x = std::move(x);
    sc.h_prev = s.h;
    sc.c_prev = s.c;
    const Eigen::VectorXd z = p.W * sc.x + p.U * s.h + p.b;
    if (p.cell == CellType::Lstm) {
      sc.i = sigmoid(z.segment(0, H));
      sc.f = sigmoid(z.segment(H, H));
      sc.o = sigmoid(z.segment(2 * H, H));
      sc.g = z.segment(3 * H, H).array().tanh();
      s.c = sc.f.cwiseProduct(s.c) + sc.i.cwiseProduct(sc.g);
      sc.tanh_c = s.c.array().tanh();
      s.h = sc.o.cwiseProduct(sc.tanh_c);
    } else {
      sc.g = z.array().tanh();
      s.h = sc.g;
    }
    caches->push_back(std::move(sc));
  }
  return s.h;
}

}  // namespace

Eigen::VectorXd forward(const RecurrentParams& p, const EmbeddingTable& emb,
                        const text::EncodedText& enc) {
  const Eigen::VectorXd h = final_hidden(p, emb, enc, nullptr);
  return softmax(p.Wy * h + p.by);
}

double cross_entropy(const Eigen::VectorXd& probs, EmotionLabel label) {
  return -std::log(std::max(probs[code(label)], 1e-12));
}

int argmax(const Eigen::VectorXd& probs) {
  int best = 0;
  for (int i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return best;
}

double loss_and_gradient(const RecurrentParams& p, const EmbeddingTable& emb,
                         const text::EncodedText& enc, EmotionLabel label, RecurrentParams& grads,
                         double scale) {
  const int H = p.hidden_dim;
  std::vector<StepCache> caches;
  const Eigen::VectorXd h_last = final_hidden(p, emb, enc, &caches);
  const Eigen::VectorXd probs = softmax(p.Wy * h_last + p.by);
  const double loss = cross_entropy(probs, label);

  Eigen::VectorXd dlogits = probs;
  dlogits[code(label)] -= 1.0;
  dlogits *= scale;
  grads.Wy.noalias() += dlogits * h_last.transpose();
  grads.by += dlogits;
  Eigen::VectorXd dh = p.Wy.transpose() * dlogits;
  Eigen::VectorXd dc = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd dz(p.gates() * H);

  for (int t = static_cast<int>(caches.size()) - 1; t >= 0; --t) {
    const StepCache& sc = caches[static_cast<std::size_t>(t)];
    if (p.cell == CellType::Lstm) {
      const Eigen::ArrayXd tc = sc.tanh_c.array();
      dc.array() += dh.array() * sc.o.array() * (1.0 - tc * tc);
      dz.segment(0, H) = (dc.array() * sc.g.array() * sc.i.array() * (1.0 - sc.i.array())).matrix();
      dz.segment(H, H) = (dc.array() * sc.c_prev.array() * sc.f.array() * (1.0 - sc.f.array())).matrix();
      dz.segment(2 * H, H) = (dh.array() * tc * sc.o.array() * (1.0 - sc.o.array())).matrix();
      dz.segment(3 * H, H) = (dc.array() * sc.i.array() * (1.0 - sc.g.array().square())).matrix();
      dc = dc.cwiseProduct(sc.f);
    } else {
      dz = (dh.array() * (1.0 - sc.g.array().square())).matrix();
    }
    grads.W.noalias() += dz * sc.x.transpose();
    grads.U.noalias() += dz * sc.h_prev.transpose();
    grads.b += dz;
    dh.noalias() = p.U.transpose() * dz;
  }
  return loss;
}

}  // namespace emo::classifier
