#include "emo/cli/cli.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "emo/classifier/model.hpp"
#include "emo/core/error.hpp"
#include "emo/core/io.hpp"
#include "emo/face/preprocess.hpp"
#include "emo/gan/trainer.hpp"
#include "emo/mapping/emotion_map.hpp"
#include "emo/service/blog.hpp"
#include "emo/service/config.hpp"
#include "emo/service/http.hpp"
#include "emo/service/pipeline.hpp"
#include "emo/text/embedding.hpp"

#ifndef EMO_DEFAULT_CASCADE
#define EMO_DEFAULT_CASCADE "haarcascade_frontalface_default.xml"
#endif

namespace emo::cli {
namespace {

namespace fs = std::filesystem;

std::string percent(double v) {
  std::ostringstream s;
  s << std::lround(v * 100.0) << "%";
  return s.str();
}

struct PrepArgs {
  std::string raw_dir, out_dir, cascade = EMO_DEFAULT_CASCADE;
  int size = face::kFaceSize;
  double scale_factor = 1.1;
  int min_neighbors = 3;
};

struct TrainEmotionArgs {
  std::string corpus, glove, out, cell = "lstm";
  int epochs = 30, hidden = 64, batch = 32;
  double lr = 1e-3;
  std::uint64_t seed = 1;
};

struct EvalArgs {
  std::string corpus, model;
};

struct TrainGanArgs {
  std::string dataset, out, metrics, resume;
  long steps = 1000;
  int batch = 16, image_size = 128, g_width = 64, g_res = 6, d_width = 64, d_layers = 6;
  double lr = 1e-4, lambda_cls = 1.0, lambda_rec = 10.0, flip_prob = 0.5;
  bool reduced = false, no_flip = false;
  std::uint64_t seed = 0;
};

struct InferArgs {
  std::string photo, text, emotion_model, gan_ckpt, out = "out.png", cascade = EMO_DEFAULT_CASCADE, config;
  bool emit_grid = false;
};

struct ServeArgs {
  std::string config;
};

int prep_dataset(const PrepArgs& a, std::ostream& out) {
  const face::CascadeModel cascade = face::load_cascade(a.cascade);
  face::PrepConfig cfg;
  cfg.size = a.size;
  cfg.scale_factor = a.scale_factor;
  cfg.min_neighbors = a.min_neighbors;
  const face::DatasetManifest m = face::build_dataset(a.raw_dir, cascade, a.out_dir, cfg);
  for (const auto& [domain, n] : m.counts) out << domain << ": " << n << "\n";
  out << "prepared=" << m.total() << ", skipped=" << m.skipped.size() << "\n";
  return kExitOk;
}

int train_emotion(const TrainEmotionArgs& a, std::ostream& out) {
  const auto items = classifier::read_corpus_csv(a.corpus);
  const text::EmbeddingStore store = text::load_vectors(a.glove);
  classifier::TrainConfig cfg;
  cfg.cell = classifier::parse_cell(a.cell);
  cfg.epochs = a.epochs;
  cfg.hidden_dim = a.hidden;
  cfg.batch = a.batch;
  cfg.lr = a.lr;
  cfg.seed = a.seed;
  const classifier::LabeledCorpus corpus = classifier::stratified_split(items, 0.8, a.seed);
  const classifier::ClassifierModel model =
      classifier::train(corpus, store, cfg, [&](const classifier::EpochReport& r) {
        out << "epoch " << r.epoch << " loss=" << std::fixed << std::setprecision(4) << r.mean_loss
            << " train_acc=" << r.train_accuracy << "\n";
      });
  classifier::save_model(model, a.out);
  out << std::fixed << std::setprecision(4) << "train_acc=" << model.meta.train_accuracy
      << ", test_acc=" << model.meta.test_accuracy << "\n";
  return kExitOk;
}

int eval_emotion(const EvalArgs& a, std::ostream& out) {
  const classifier::ClassifierModel model = classifier::load_model(a.model);
  const classifier::LabeledCorpus corpus = classifier::stratified_split(
      classifier::read_corpus_csv(a.corpus), model.meta.train_fraction, model.meta.seed);
  const double train_acc = classifier::evaluate(model, corpus.train_items());
  const double test_acc = corpus.test.empty() ? 0.0 : classifier::evaluate(model, corpus.test_items());
  const std::string name = std::string(model.params.cell == classifier::CellType::Lstm ? "LSTM" : "RNN") + " + " +
                           fs::path(a.corpus).stem().string();
  const int w = std::max<int>(static_cast<int>(name.size()), 13) + 2;
  out << std::left << std::setw(w) << "Model+Dataset" << std::setw(12) << "Train Acc." << "Test Acc.\n";
  out << std::left << std::setw(w) << name << std::setw(12) << percent(train_acc) << percent(test_acc) << "\n";
  out << std::fixed << std::setprecision(4) << "train_acc=" << train_acc << ", test_acc=" << test_acc << "\n";
  return kExitOk;
}

int train_gan(const TrainGanArgs& a, std::ostream& out) {
  gan::GanConfig cfg = a.reduced ? gan::reduced_config() : gan::GanConfig{};
  if (!a.reduced) {
    cfg.model.image_size = a.image_size;
    cfg.model.generator = {a.g_width, a.g_res};
    cfg.model.discriminator.width = a.d_width;
    cfg.model.discriminator.layers = a.d_layers;
  }
  cfg.batch = a.batch;
  cfg.lr = a.lr;
  cfg.weights = {a.lambda_cls, a.lambda_rec};
  cfg.flip = !a.no_flip;
  cfg.flip_prob = a.flip_prob;
  cfg.seed = a.seed;
  gan::GanState state = a.resume.empty() ? gan::init_state(cfg) : gan::load_checkpoint(a.resume);
  const gan::FaceDataset data = gan::load_face_dataset(a.dataset, state.config.model.image_size);
  std::ofstream metrics_file;
  if (!a.metrics.empty()) {
    metrics_file.open(a.metrics);
    if (!metrics_file) throw Error(Errc::IoError, "cannot open " + a.metrics);
  }
  std::ostream& metrics = a.metrics.empty() ? out : metrics_file;
  gan::train(state, data, a.steps, [&](const gan::StepMetrics& m) { metrics << gan::metrics_json(m) << "\n"; });
  gan::save_checkpoint(state, a.out);
  out << "checkpoint=" << a.out << " sha256=" << sha256_hex(read_file(a.out)) << " step=" << state.step << "\n";
  return kExitOk;
}

int infer(const InferArgs& a, std::ostream& out) {
  service::Models models;
  if (!a.config.empty()) models.emotion_map = mapping::EmotionMap::from_toml(read_text_file(a.config));
  models.classifier = std::make_shared<classifier::ClassifierModel>(classifier::load_model(a.emotion_model));
  models.gan = std::make_shared<gan::GanState>(gan::load_checkpoint(a.gan_ckpt));
  models.cascade = std::make_shared<face::CascadeModel>(face::load_cascade(a.cascade));
  const Image photo = to_rgb(read_image(a.photo));
  const Image prepped = face::prep_face(photo, *models.cascade, models.prep);
  const service::TransferResult r = service::transfer_emotion_prepped(a.text, prepped, models);
  write_png(a.out, r.face);
  out << "emotion=" << to_string(r.emotion) << " domain=" << to_string(r.domain)
      << (r.low_confidence ? " low_confidence" : "") << "\n";
  out << "probabilities:";
  for (int i = 0; i < kNumEmotions; ++i)
    out << " " << kEmotionNames[static_cast<std::size_t>(i)] << "=" << std::fixed << std::setprecision(4)
        << r.probabilities[static_cast<std::size_t>(i)];
  out << "\nwrote " << a.out << "\n";
  if (a.emit_grid) {
    fs::path grid = a.out;
    grid.replace_filename(grid.stem().string() + "_grid.png");
    write_png(grid, service::expression_strip(*models.gan, prepped));
    out << "wrote " << grid.string() << "\n";
  }
  return kExitOk;
}

service::ApiServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int serve(const ServeArgs& a, std::ostream& out) {
  const service::ServiceConfig cfg = service::load_service_config(a.config);
  auto models = std::make_shared<service::Models>();
  models->emotion_map = cfg.emotion_map;
  models->confidence_threshold = cfg.confidence_threshold;
  if (!cfg.classifier_model.empty())
    models->classifier = std::make_shared<classifier::ClassifierModel>(classifier::load_model(cfg.classifier_model));
  if (!cfg.gan_checkpoint.empty())
    models->gan = std::make_shared<gan::GanState>(gan::load_checkpoint(cfg.gan_checkpoint));
  models->cascade = std::make_shared<face::CascadeModel>(
      face::load_cascade(cfg.cascade.empty() ? fs::path(EMO_DEFAULT_CASCADE) : cfg.cascade));
  service::BlogService blog(cfg.store_root, models);
  service::ApiServer server(blog, cfg.max_upload_bytes, cfg.static_dir);
  if (!server.bind(cfg.host, cfg.port)) throw Error(Errc::IoError, "cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
  out << "listening on http://" << cfg.host << ":" << cfg.port << std::endl;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.listen_after_bind();
  g_server = nullptr;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Text-driven facial expression transfer"};
  app.name("emo");
  app.require_subcommand(1);

  PrepArgs prep;
  auto* c_prep = app.add_subcommand("prep-dataset", "Detect, crop and equalize faces into <out>/<domain>/*.png");
  c_prep->add_option("--raw-dir", prep.raw_dir, "Input folder with one subfolder per expression domain")->required();
  c_prep->add_option("--out-dir", prep.out_dir, "Output dataset folder")->required();
  c_prep->add_option("--cascade", prep.cascade, "Haar cascade XML")->capture_default_str();
  c_prep->add_option("--size", prep.size, "Output face size in pixels")->capture_default_str();
  c_prep->add_option("--scale-factor", prep.scale_factor, "Detector pyramid scale step")->capture_default_str();
  c_prep->add_option("--min-neighbors", prep.min_neighbors, "Detector grouping threshold")->capture_default_str();

  TrainEmotionArgs te;
  auto* c_te = app.add_subcommand("train-emotion", "Train the text emotion classifier");
  c_te->add_option("--corpus", te.corpus, "CSV corpus with header label,text")->required();
  c_te->add_option("--glove", te.glove, "Word vectors in GloVe text format")->required();
  c_te->add_option("--out", te.out, "Output model file (JSON)")->required();
  c_te->add_option("--epochs", te.epochs, "Training epochs")->capture_default_str();
  c_te->add_option("--hidden", te.hidden, "Hidden state size")->capture_default_str();
  c_te->add_option("--batch", te.batch, "Mini-batch size")->capture_default_str();
  c_te->add_option("--lr", te.lr, "Adam learning rate")->capture_default_str();
  c_te->add_option("--cell", te.cell, "Recurrent cell: lstm or rnn")->capture_default_str();
  c_te->add_option("--seed", te.seed, "Seed for the split, init and shuffling")->capture_default_str();

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval-emotion", "Report train/test accuracy of a classifier on a corpus");
  c_ev->add_option("--corpus", ev.corpus, "CSV corpus with header label,text")->required();
  c_ev->add_option("--model", ev.model, "Model file from train-emotion")->required();

  TrainGanArgs tg;
  auto* c_tg = app.add_subcommand("train-gan", "Train the expression GAN");
  c_tg->add_option("--dataset", tg.dataset, "Prepared dataset folder (<domain>/*.png)")->required();
  c_tg->add_option("--out", tg.out, "Output checkpoint file")->required();
  c_tg->add_option("--steps", tg.steps, "Training steps")->capture_default_str();
  c_tg->add_option("--batch", tg.batch, "Batch size")->capture_default_str();
  c_tg->add_option("--lr", tg.lr, "Adam learning rate for both networks")->capture_default_str();
  c_tg->add_option("--seed", tg.seed, "Seed for init, sampling, flips and targets")->capture_default_str();
  c_tg->add_option("--image-size", tg.image_size, "Training image size")->capture_default_str();
  c_tg->add_option("--g-width", tg.g_width, "Generator base width")->capture_default_str();
  c_tg->add_option("--g-res", tg.g_res, "Generator residual blocks")->capture_default_str();
  c_tg->add_option("--d-width", tg.d_width, "Discriminator base width")->capture_default_str();
  c_tg->add_option("--d-layers", tg.d_layers, "Discriminator stride-2 layers")->capture_default_str();
  c_tg->add_flag("--reduced", tg.reduced, "Use the desk-scale 64x64 config (ignores the size/width flags)");
  c_tg->add_option("--lambda-cls", tg.lambda_cls, "Domain classification weight")->capture_default_str();
  c_tg->add_option("--lambda-rec", tg.lambda_rec, "Cycle reconstruction weight")->capture_default_str();
  c_tg->add_option("--flip-prob", tg.flip_prob, "Horizontal flip probability")->capture_default_str();
  c_tg->add_flag("--no-flip", tg.no_flip, "Disable flip augmentation");
  c_tg->add_option("--metrics", tg.metrics, "Write per-step metrics (NDJSON) here instead of stdout");
  c_tg->add_option("--resume", tg.resume, "Continue from this checkpoint (its config wins)");

  InferArgs in;
  auto* c_in = app.add_subcommand("infer", "Classify text and re-synthesize a face with that emotion");
  c_in->add_option("--photo", in.photo, "Input photo (PNG or JPEG)")->required();
  c_in->add_option("--text", in.text, "Text whose emotion is transferred")->required();
  c_in->add_option("--emotion-model", in.emotion_model, "Classifier model file")->required();
  c_in->add_option("--gan-ckpt", in.gan_ckpt, "GAN checkpoint file")->required();
  c_in->add_option("--out", in.out, "Output PNG")->capture_default_str();
  c_in->add_option("--cascade", in.cascade, "Haar cascade XML")->capture_default_str();
  c_in->add_option("--config", in.config, "TOML config for [emotion_map] overrides");
  c_in->add_flag("--emit-grid", in.emit_grid, "Also write <out>_grid.png: input plus all 7 domains");

  ServeArgs sv;
  auto* c_sv = app.add_subcommand("serve", "Run the blog HTTP service");
  c_sv->add_option("--config", sv.config, "TOML service config")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    err << target->help();
    return kExitUsage;
  }

  try {
    if (c_prep->parsed()) return prep_dataset(prep, out);
    if (c_te->parsed()) return train_emotion(te, out);
    if (c_ev->parsed()) return eval_emotion(ev, out);
    if (c_tg->parsed()) return train_gan(tg, out);
    if (c_in->parsed()) return infer(in, out);
    if (c_sv->parsed()) return serve(sv, out);
  } catch (const Error& e) {
    err << e.name() << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "IoError: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace emo::cli
