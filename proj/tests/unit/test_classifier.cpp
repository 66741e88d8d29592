#include <doctest.h>

#include <cmath>
#include <random>

#include "emo/classifier/model.hpp"
#include "emo/core/error.hpp"
#include "emo/datagen/synthetic.hpp"
#include "emo/optim/adam.hpp"
#include "gradcheck.hpp"

using namespace emo;
using namespace emo::classifier;

namespace {

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

RecurrentParams random_params(CellType cell, int d, int h, std::uint64_t seed, double scale = 0.5) {
  RecurrentParams p = RecurrentParams::zeros(cell, d, h);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& [name, t] : p.tensors())
    for (double& v : t) v = u(rng);
  return p;
}

EmbeddingTable random_table(int rows, int dim, std::uint64_t seed) {
  EmbeddingTable e;
  e.dim = dim;
  e.rows = Eigen::MatrixXd::Zero(rows, dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int r = 1; r < rows; ++r)
    for (int c = 0; c < dim; ++c) e.rows(r, c) = u(rng);
  return e;
}

double loss_of(const RecurrentParams& p, const EmbeddingTable& e, const text::EncodedText& enc, EmotionLabel y) {
  return cross_entropy(forward(p, e, enc), y);
}

}  // namespace

TEST_SUITE("classifier") {
  TEST_CASE("lstm_step zero weights is a fixed point") {
    const RecurrentParams p = RecurrentParams::zeros(CellType::Lstm, 3, 2);
    const CellState s = lstm_step(Eigen::VectorXd::Constant(3, 0.7), {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)}, p);
    CHECK(s.h.isZero());
    CHECK(s.c.isZero());
  }

  TEST_CASE("lstm_step forget gate saturation keeps the cell") {
    RecurrentParams p = RecurrentParams::zeros(CellType::Lstm, 1, 1);
    p.b[1] = 50.0;  // forget gate bias
    const CellState s = lstm_step(Eigen::VectorXd::Constant(1, 0.3), {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)}, p);
    CHECK(s.c[0] == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("lstm_step matches a scalar evaluation of the gate equations") {
    const RecurrentParams p = random_params(CellType::Lstm, 2, 2, 11);
    const Eigen::Vector2d x(0.4, -0.9), h0(0.1, -0.2), c0(0.5, 0.3);
    const CellState s = lstm_step(x, {h0, c0}, p);
    for (int k = 0; k < 2; ++k) {
      auto pre = [&](int gate) {
        const int r = gate * 2 + k;
        double z = p.b[r];
        for (int j = 0; j < 2; ++j) z += p.W(r, j) * x[j] + p.U(r, j) * h0[j];
        return z;
      };
      const double i = sig(pre(0)), f = sig(pre(1)), o = sig(pre(2)), g = std::tanh(pre(3));
      const double c = f * c0[k] + i * g;
      CHECK(s.c[k] == doctest::Approx(c).epsilon(1e-14));
      CHECK(s.h[k] == doctest::Approx(o * std::tanh(c)).epsilon(1e-14));
    }
  }

  TEST_CASE("zero-parameter model and empty sequence read out uniform") {
    const RecurrentParams p = RecurrentParams::zeros(CellType::Lstm, 3, 4);
    const EmbeddingTable e = random_table(5, 3, 2);
    for (const auto& enc : {text::EncodedText{{2, 3, 4, 0}, 3}, text::EncodedText{{0, 0}, 0}}) {
      const Eigen::VectorXd probs = forward(p, e, enc);
      for (int i = 0; i < kNumEmotions; ++i) CHECK(probs[i] == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
    }
  }

  TEST_CASE("cross entropy examples") {
    const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(7, 1.0 / 7.0);
    CHECK(cross_entropy(uniform, EmotionLabel::Anger) == doctest::Approx(1.945910).epsilon(1e-6));
    Eigen::VectorXd one_hot = Eigen::VectorXd::Zero(7);
    one_hot[2] = 1.0;
    CHECK(cross_entropy(one_hot, EmotionLabel::Anger) == doctest::Approx(0.0));
    Eigen::VectorXd p59 = Eigen::VectorXd::Constant(7, 0.41 / 6.0);
    p59[1] = 0.59;
    CHECK(cross_entropy(p59, EmotionLabel::Sadness) == doctest::Approx(-std::log(0.59)).epsilon(1e-12));
    CHECK(cross_entropy(p59, EmotionLabel::Sadness) == doctest::Approx(0.527633).epsilon(1e-6));
  }

  TEST_CASE("argmax ties pick the lowest code") {
    CHECK(argmax(Eigen::VectorXd::Constant(7, 1.0 / 7.0)) == 0);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(7);
    v[3] = v[5] = 0.5;
    CHECK(argmax(v) == 3);
  }

  TEST_CASE("analytic gradients match central differences") {
    constexpr double kTol = 1e-4;
    constexpr double kStep = 1e-5;
    std::mt19937_64 rng(3);
    for (CellType cell : {CellType::Lstm, CellType::Rnn}) {
      for (int trial = 0; trial < 4; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 4), h = 1 + static_cast<int>(rng() % 4);
        const int len = 1 + static_cast<int>(rng() % 3);
        RecurrentParams p = random_params(cell, d, h, rng());
        const EmbeddingTable e = random_table(6, d, rng());
        text::EncodedText enc{{0, 0, 0, 0}, len};
        for (int t = 0; t < len; ++t) enc.ids[static_cast<std::size_t>(t)] = 1 + static_cast<int>(rng() % 5);
        const auto y = static_cast<EmotionLabel>(rng() % 7);
        RecurrentParams g = RecurrentParams::zeros(cell, d, h);
        loss_and_gradient(p, e, enc, y, g);
        auto gt = g.tensors();
        auto pt = p.tensors();
        for (std::size_t t = 0; t < pt.size(); ++t) {
          const auto num = test::central_differences(pt[t].second, {}, kStep, [&] { return loss_of(p, e, enc, y); });
          INFO(to_string(cell), " ", pt[t].first);
          CHECK(test::relative_error(gt[t].second, num) < kTol);
        }
      }
    }
  }

  TEST_CASE("adam first step and scripted steps") {
    const optim::AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
    std::vector<double> x{1.0, 1.0};
    optim::AdamMoments<double> mom(2);
    const std::vector<double> g1{1.0, -1.0};
    optim::adam_step<double>(x, g1, mom, 1, cfg);
    CHECK(x[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-9));
    CHECK(x[1] == doctest::Approx(1.0 + 0.01).epsilon(1e-9));

    const std::vector<double> g2{0.5, 2.0};
    optim::adam_step<double>(x, g2, mom, 2, cfg);
    for (int k = 0; k < 2; ++k) {
      const double m1 = 0.1 * g1[k], v1 = 0.001 * g1[k] * g1[k];
      const double m2 = 0.9 * m1 + 0.1 * g2[k], v2 = 0.999 * v1 + 0.001 * g2[k] * g2[k];
      const double x1 = 1.0 - 0.01 * (m1 / 0.1) / (std::sqrt(v1 / 0.001) + 1e-8);
      const double x2 = x1 - 0.01 * (m2 / (1 - 0.81)) / (std::sqrt(v2 / (1 - 0.999 * 0.999)) + 1e-8);
      CHECK(x[k] == doctest::Approx(x2).epsilon(1e-12));
    }

    std::vector<double> still{2.0};
    optim::AdamMoments<double> zero(1);
    optim::adam_step<double>(still, std::vector<double>{0.0}, zero, 1, cfg);
    CHECK(still[0] == 2.0);
  }

  TEST_CASE("corpus csv round trip and split") {
    const auto items = datagen::synthetic_corpus(1, 10);
    REQUIRE(items.size() == 70);
    const auto back = parse_corpus_csv(write_corpus_csv(items));
    REQUIRE(back.size() == items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      CHECK(back[i].text == items[i].text);
      CHECK(back[i].label == items[i].label);
    }
    const LabeledCorpus c = stratified_split(items, 0.8, 4);
    CHECK(c.train.size() == 56);
    CHECK(c.test.size() == 14);
    const LabeledCorpus again = stratified_split(items, 0.8, 4);
    CHECK(c.train == again.train);
  }

  TEST_CASE("bad csv rows are rejected") {
    CHECK_THROWS_AS(parse_corpus_csv("label,text\nsleepy,zzz\n"), Error);
    CHECK_THROWS_AS(parse_corpus_csv(""), Error);
  }

  TEST_CASE("training is deterministic and epochs=0 stays near chance") {
    const auto items = datagen::synthetic_corpus(2, 20);
    const text::EmbeddingStore store = text::parse_vectors(datagen::synthetic_vectors(2, 16));
    const LabeledCorpus corpus = stratified_split(items, 0.8, 9);
    TrainConfig cfg;
    cfg.hidden_dim = 8;
    cfg.epochs = 2;
    cfg.seed = 9;
    const ClassifierModel a = train(corpus, store, cfg);
    const ClassifierModel b = train(corpus, store, cfg);
    CHECK(serialize_model(a) == serialize_model(b));

    cfg.epochs = 0;
    const ClassifierModel z = train(corpus, store, cfg);
    CHECK(z.meta.train_accuracy < 1.0 / 7.0 + 0.15);
  }

  TEST_CASE("uniform model scores 1/7 on a balanced split") {
    const auto items = datagen::synthetic_corpus(3, 10);
    const text::EmbeddingStore store = text::parse_vectors(datagen::synthetic_vectors(3, 8));
    TrainConfig cfg;
    cfg.hidden_dim = 4;
    ClassifierModel m = build_untrained_model(items, store, cfg);
    m.params.set_zero();
    CHECK(evaluate(m, items) == doctest::Approx(1.0 / 7.0));
  }

  TEST_CASE("classify conventions") {
    const auto items = datagen::synthetic_corpus(4, 10);
    const text::EmbeddingStore store = text::parse_vectors(datagen::synthetic_vectors(4, 8));
    TrainConfig cfg;
    cfg.hidden_dim = 4;
    const ClassifierModel m = build_untrained_model(items, store, cfg);

    const Classification empty = classify(m, "");
    CHECK(code(empty.label) == 0);
    CHECK(empty.low_confidence);

    // Unknown words encode as <unk>; one of them reads exactly like [<unk>].
    const Classification unk = classify(m, "qqqqqqq");
    const Eigen::VectorXd single = forward(m.params, m.embedding, text::EncodedText{{1}, 1});
    for (int i = 0; i < kNumEmotions; ++i) CHECK(unk.probabilities[static_cast<std::size_t>(i)] == single[i]);
    const text::EncodedText many = m.encode("qqqqqqq zzzzzzz xxxxxxx");
    CHECK(many.length == 3);
    for (int i = 0; i < 3; ++i) CHECK(many.ids[static_cast<std::size_t>(i)] == text::kUnkId);

    const Classification c1 = classify(m, "I'm not feeling well today");
    const Classification c2 = classify(m, "I'm not feeling well today");
    CHECK(c1.probabilities == c2.probabilities);
  }

  TEST_CASE("model serialization round trip") {
    const auto items = datagen::synthetic_corpus(5, 5);
    const text::EmbeddingStore store = text::parse_vectors(datagen::synthetic_vectors(5, 8));
    TrainConfig cfg;
    cfg.hidden_dim = 3;
    const ClassifierModel m = build_untrained_model(items, store, cfg);
    const std::string s = serialize_model(m);
    CHECK(serialize_model(deserialize_model(s)) == s);
    CHECK_THROWS_AS(deserialize_model("{\"format\":\"emomodel/9\"}"), Error);
  }
}
