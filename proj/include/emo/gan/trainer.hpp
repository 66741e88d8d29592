#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "emo/core/image.hpp"
#include "emo/gan/objective.hpp"
#include "emo/optim/adam.hpp"

namespace emo::gan {

struct GanConfig {
  ModelConfig model;
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  LossWeights weights;
  int batch = 16;
  bool flip = true;
  double flip_prob = 0.5;
  std::uint64_t seed = 0;
};

/// Desk-scale config: 64x64 images, narrow networks.
GanConfig reduced_config();

/// Everything a checkpoint holds.
struct GanState {
  GanConfig config;
  Network<float> generator;
  Discriminator<float> discriminator;
  std::vector<optim::AdamMoments<float>> g_moments;  // one per parameter tensor
  std::vector<optim::AdamMoments<float>> d_moments;
  long step = 0;
  std::mt19937_64 rng;
};

/// Builds both networks, normal(0, 0.02) init, zero moments.
GanState init_state(const GanConfig& cfg);

/// Prepared faces in [-1, 1], one sample per image.
struct FaceDataset {
  int image_size = 0;
  std::vector<std::vector<float>> images;  // 3 x size x size each
  std::vector<int> labels;
  std::vector<std::string> files;
};

Tensor<float> to_tensor(const Image& img);
Image to_image(const Tensor<float>& t, int index = 0);

/// Reads `<dir>/<domain>/*.png` in sorted order; images whose size differs
/// from image_size are resized. Throws EmptyDataset when nothing is found.
FaceDataset load_face_dataset(const std::filesystem::path& dir, int image_size);

struct Batch {
  Tensor<float> images;
  std::vector<int> labels;
};

/// Uniform sampling with replacement, then per-sample horizontal flips, all
/// drawn from state.rng. A flip draw is consumed even when flips are off.
Batch sample_batch(const FaceDataset& data, GanState& state);

struct StepMetrics {
  long step = 0;
  LossComponents losses;
};

/// One discriminator update, then one generator update. Targets are drawn
/// uniformly from state.rng.
StepMetrics train_step(GanState& state, const Batch& batch);

/// {"step", "d_loss", "g_loss", "adv", "cls", "rec", ...} on one line.
std::string metrics_json(const StepMetrics& m);

using StepCallback = std::function<void(const StepMetrics&)>;

void train(GanState& state, const FaceDataset& data, long steps, const StepCallback& on_step = {});

std::vector<std::uint8_t> serialize_checkpoint(const GanState& state);
GanState deserialize_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const GanState& state, const std::filesystem::path& path);
GanState load_checkpoint(const std::filesystem::path& path);

/// Face must be 128x128x3 (BadShape otherwise). The generator is fully
/// convolutional, so it runs at 128x128 whatever size it was trained at.
Image synthesize(const GanState& state, const Image& face, ExpressionDomain d);

/// Fraction of samples whose domain head argmax equals the requested target,
/// over `count` (image, target) pairs at the training size. Deterministic.
double domain_agreement(const GanState& state, const FaceDataset& data, int count, std::uint64_t seed);

}  // namespace emo::gan
