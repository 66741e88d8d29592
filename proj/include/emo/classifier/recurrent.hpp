#pragma once

#include <Eigen/Dense>

#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emo/classifier/labels.hpp"
#include "emo/text/normalizer.hpp"

namespace emo::classifier {

enum class CellType { Lstm, Rnn };

std::string_view to_string(CellType cell);
CellType parse_cell(std::string_view name);

/// Recurrent cell plus softmax readout.
///
/// For the LSTM the gate blocks of `W`, `U` and `b` are stacked row-wise in the
/// order input, forget, output, candidate (each `hidden` rows). The vanilla RNN
/// baseline has a single block.
struct RecurrentParams {
  CellType cell = CellType::Lstm;
  int input_dim = 0;
  int hidden_dim = 0;
  Eigen::MatrixXd W;   // (gates*H) x D
  Eigen::MatrixXd U;   // (gates*H) x H
  Eigen::VectorXd b;   // gates*H
  Eigen::MatrixXd Wy;  // 7 x H
  Eigen::VectorXd by;  // 7

  static RecurrentParams zeros(CellType cell, int input_dim, int hidden_dim);
  int gates() const noexcept { return cell == CellType::Lstm ? 4 : 1; }

  /// Named views over every tensor, in serialization order.
  std::vector<std::pair<std::string, std::span<double>>> tensors();
  std::vector<std::pair<std::string, std::span<const double>>> tensors() const;
  std::size_t parameter_count() const;
  void set_zero();
  void check_shapes() const;
};

/// Uniform(-k, k) with k = 1/sqrt(hidden).
void init_uniform(RecurrentParams& p, std::mt19937_64& rng);

struct CellState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

/// One LSTM step: gates i,f,o = sigmoid, g = tanh; c' = f*c + i*g; h' = o*tanh(c').
CellState lstm_step(const Eigen::VectorXd& x, const CellState& prev, const RecurrentParams& p);
/// Vanilla recurrent step h' = tanh(W x + U h + b); c is unused.
CellState rnn_step(const Eigen::VectorXd& x, const CellState& prev, const RecurrentParams& p);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// Row-major (rows x dim) embedding table indexed by vocabulary id.
struct EmbeddingTable {
  int dim = 0;
  Eigen::MatrixXd rows;  // rows x dim

  Eigen::VectorXd row(int id) const { return rows.row(id).transpose(); }
};

/// Probability vector for the first `enc.length` tokens of `enc`.
Eigen::VectorXd forward(const RecurrentParams& p, const EmbeddingTable& emb,
                        const text::EncodedText& enc);

/// Cross-entropy of `probs` against `label`, probability clamped to >= 1e-12.
double cross_entropy(const Eigen::VectorXd& probs, EmotionLabel label);

/// Loss of one sequence; accumulates `scale * dLoss/dparam` into `grads`.
double loss_and_gradient(const RecurrentParams& p, const EmbeddingTable& emb,
                         const text::EncodedText& enc, EmotionLabel label, RecurrentParams& grads,
                         double scale = 1.0);

/// Lowest-code argmax.
int argmax(const Eigen::VectorXd& probs);

}  // namespace emo::classifier
