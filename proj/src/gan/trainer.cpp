#include "emo/gan/trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include <nlohmann/json.hpp>

#include "emo/core/error.hpp"
#include "emo/core/io.hpp"
#include "emo/face/preprocess.hpp"

namespace emo::gan {

using nlohmann::json;

namespace {

constexpr std::string_view kCheckpointTag = "ganckpt/1";
constexpr double kInitStd = 0.02;

optim::AdamConfig adam_config(const GanConfig& c) { return {c.lr, c.beta1, c.beta2, 1e-8}; }

template <typename P>
std::vector<optim::AdamMoments<float>> moments_for(const std::vector<P>& params) {
  std::vector<optim::AdamMoments<float>> m;
  for (const auto& p : params) m.emplace_back(p.data.size());
  return m;
}

void apply_adam(std::vector<nn::ParamTensor<float>*> params, const std::vector<std::vector<float>>& grads,
                std::vector<optim::AdamMoments<float>>& moments, long step, const optim::AdamConfig& cfg) {
  for (std::size_t i = 0; i < params.size(); ++i)
    optim::adam_step<float>(params[i]->data, grads[i], moments[i], step, cfg);
}

std::vector<nn::ParamTensor<float>*> refs(Network<float>& n) {
  std::vector<nn::ParamTensor<float>*> out;
  for (auto& p : n.params()) out.push_back(&p);
  return out;
}

}  // namespace

GanConfig reduced_config() {
  GanConfig c;
  c.model.image_size = 64;
  c.model.generator = {8, 3};
  c.model.discriminator = {32, 4, 0.01};
  return c;
}

GanState init_state(const GanConfig& cfg) {
  if (cfg.batch < 1 || cfg.lr <= 0 || cfg.flip_prob < 0 || cfg.flip_prob > 1)
    throw Error(Errc::BadConfig, "bad GAN training config");
  GanState s{cfg, build_generator<float>(cfg.model.generator),
             build_discriminator<float>(cfg.model.discriminator, cfg.model.image_size), {}, {}, 0,
             std::mt19937_64(cfg.seed)};
  const std::uint64_t g_seed = s.rng();
  const std::uint64_t d_seed = s.rng();
  s.generator.init_normal(g_seed, kInitStd);
  s.discriminator.trunk.init_normal(d_seed, kInitStd);
  s.discriminator.patch.init_normal(d_seed + 1, kInitStd);
  s.discriminator.cls.init_normal(d_seed + 2, kInitStd);
  s.g_moments = moments_for(s.generator.params());
  std::vector<nn::ParamTensor<float>> dp;
  for (const auto* p : s.discriminator.param_refs()) dp.push_back(*p);
  s.d_moments = moments_for(dp);
  return s;
}

Tensor<float> to_tensor(const Image& img) {
  if (img.channels != 3) throw Error(Errc::BadShape, "expected an RGB image");
  Tensor<float> t(1, 3, img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) t.at(0, c, y, x) = static_cast<float>(img.at(x, y, c) / 127.5 - 1.0);
  return t;
}

Image to_image(const Tensor<float>& t, int index) {
  if (t.c != 3) throw Error(Errc::BadShape, "expected a 3-channel tensor");
  Image img(t.w, t.h, 3);
  for (int y = 0; y < t.h; ++y)
    for (int x = 0; x < t.w; ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = std::round((static_cast<double>(t.at(index, c, y, x)) + 1.0) * 127.5);
        img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
  return img;
}

FaceDataset load_face_dataset(const std::filesystem::path& dir, int image_size) {
  namespace fs = std::filesystem;
  FaceDataset data;
  data.image_size = image_size;
  for (int d = 0; d < kNumDomains; ++d) {
    const fs::path sub = dir / std::string(kDomainNames[static_cast<std::size_t>(d)]);
    if (!fs::is_directory(sub)) continue;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(sub))
      if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      Image img = to_rgb(read_image(f));
      if (img.width != image_size || img.height != image_size)
        img = face::crop_resize(img, {0, 0, img.width, img.height}, image_size);
      data.images.push_back(std::move(to_tensor(img).data));
      data.labels.push_back(d);
      data.files.push_back(f.string());
    }
  }
  if (data.images.empty()) throw Error(Errc::EmptyDataset, "no images under " + dir.string());
  return data;
}

Batch sample_batch(const FaceDataset& data, GanState& state) {
  const int n = state.config.batch;
  const int s = data.image_size;
  Batch b{Tensor<float>(n, 3, s, s), std::vector<int>(static_cast<std::size_t>(n))};
  std::uniform_int_distribution<std::size_t> pick(0, data.images.size() - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const std::size_t k = pick(state.rng);
    const bool flip = coin(state.rng) < state.config.flip_prob && state.config.flip;
    const std::vector<float>& src = data.images[k];
    float* dst = b.images.sample(i);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
          const int sx = flip ? s - 1 - x : x;
          dst[(static_cast<std::size_t>(c) * s + y) * s + x] = src[(static_cast<std::size_t>(c) * s + y) * s + sx];
        }
    b.labels[static_cast<std::size_t>(i)] = data.labels[k];
  }
  return b;
}

StepMetrics train_step(GanState& state, const Batch& batch) {
  std::uniform_int_distribution<int> domain(0, kNumDomains - 1);
  std::vector<int> targets(static_cast<std::size_t>(batch.images.n));
  for (int& t : targets) t = domain(state.rng);

  const long step = state.step + 1;
  const auto adam = adam_config(state.config);
  StepMetrics m;
  m.step = step;

  // G does not change during the discriminator update, so one fake pass
  // (and its trace) serves both updates.
  const FakePass<float> fake = make_fakes(state.generator, batch.images, targets);

  auto dgrads = state.discriminator.zero_grads();
  discriminator_objective(state.discriminator, batch.images, batch.labels, fake.fake, state.config.weights,
                          m.losses, &dgrads);
  apply_adam(state.discriminator.param_refs(), dgrads, state.d_moments, step, adam);

  auto ggrads = state.generator.zero_grads();
  generator_objective(state.generator, state.discriminator, batch.images, batch.labels, targets, fake,
                      state.config.weights, m.losses, &ggrads);
  apply_adam(refs(state.generator), ggrads, state.g_moments, step, adam);

  state.step = step;
  return m;
}

std::string metrics_json(const StepMetrics& m) {
  nlohmann::ordered_json j;
  j["step"] = m.step;
  j["d_loss"] = m.losses.d_loss;
  j["g_loss"] = m.losses.g_loss;
  j["adv"] = m.losses.adv;
  j["cls"] = m.losses.cls_real;
  j["rec"] = m.losses.rec;
  j["cls_fake"] = m.losses.cls_fake;
  j["d_adv"] = m.losses.d_adv;
  j["g_adv"] = m.losses.g_adv;
  return j.dump();
}

void train(GanState& state, const FaceDataset& data, long steps, const StepCallback& on_step) {
  if (data.image_size != state.config.model.image_size)
    throw Error(Errc::BadShape, "dataset image size does not match the model config");
  for (long i = 0; i < steps; ++i) {
    const Batch b = sample_batch(data, state);
    const StepMetrics m = train_step(state, b);
    if (on_step) on_step(m);
  }
}

// ---- checkpoint ----

namespace {

json config_to_json(const GanConfig& c) {
  return json{{"image_size", c.model.image_size},
              {"generator", {{"width", c.model.generator.width}, {"res_blocks", c.model.generator.res_blocks}}},
              {"discriminator",
               {{"width", c.model.discriminator.width},
                {"layers", c.model.discriminator.layers},
                {"slope", c.model.discriminator.slope}}},
              {"lr", c.lr},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"lambda_cls", c.weights.lambda_cls},
              {"lambda_rec", c.weights.lambda_rec},
              {"batch", c.batch},
              {"flip", c.flip},
              {"flip_prob", c.flip_prob},
              {"seed", c.seed}};
}

GanConfig config_from_json(const json& j) {
  GanConfig c;
  c.model.image_size = j.at("image_size").get<int>();
  c.model.generator.width = j.at("generator").at("width").get<int>();
  c.model.generator.res_blocks = j.at("generator").at("res_blocks").get<int>();
  c.model.discriminator.width = j.at("discriminator").at("width").get<int>();
  c.model.discriminator.layers = j.at("discriminator").at("layers").get<int>();
  c.model.discriminator.slope = j.at("discriminator").at("slope").get<double>();
  c.lr = j.at("lr").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.weights.lambda_cls = j.at("lambda_cls").get<double>();
  c.weights.lambda_rec = j.at("lambda_rec").get<double>();
  c.batch = j.at("batch").get<int>();
  c.flip = j.at("flip").get<bool>();
  c.flip_prob = j.at("flip_prob").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

struct NamedBuffer {
  std::string name;
  std::vector<int> shape;
  std::vector<float>* data;
};

std::vector<NamedBuffer> buffers(GanState& s) {
  std::vector<NamedBuffer> out;
  std::vector<nn::ParamTensor<float>*> params = refs(s.generator);
  for (auto* p : s.discriminator.param_refs()) params.push_back(p);
  for (auto* p : params) out.push_back({p->name, p->shape, &p->data});
  const std::size_t ng = s.generator.params().size();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& mom = i < ng ? s.g_moments[i] : s.d_moments[i - ng];
    out.push_back({"adam_m." + params[i]->name, params[i]->shape, &mom.m});
    out.push_back({"adam_v." + params[i]->name, params[i]->shape, &mom.v});
  }
  return out;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const GanState& state) {
  GanState& s = const_cast<GanState&>(state);  // buffers() only reads here
  const auto bufs = buffers(s);
  json table = json::array();
  std::size_t offset = 0;
  for (const auto& b : bufs) {
    table.push_back({{"name", b.name}, {"shape", b.shape}, {"dtype", "f32"}, {"offset", offset},
                     {"count", b.data->size()}});
    offset += b.data->size() * 4;
  }
  std::ostringstream rng;
  rng << state.rng;
  json domains = json::array();
  for (auto n : kDomainNames) domains.push_back(std::string(n));
  const json header{{"config", config_to_json(state.config)},
                    {"step", state.step},
                    {"domains", domains},
                    {"rng", rng.str()},
                    {"tensors", table}};
  const std::string h = header.dump();

  std::vector<std::uint8_t> out(kCheckpointTag.begin(), kCheckpointTag.end());
  out.push_back('\n');
  put_u32(out, static_cast<std::uint32_t>(h.size()));
  out.insert(out.end(), h.begin(), h.end());
  out.reserve(out.size() + offset + 32);
  for (const auto& b : bufs)
    for (float v : *b.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  const auto digest = sha256(out);
  out.insert(out.end(), digest.begin(), digest.end());
  return out;
}

GanState deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  const auto nl = std::find(bytes.begin(), bytes.begin() + std::min<std::size_t>(bytes.size(), 64), '\n');
  if (nl == bytes.begin() + std::min<std::size_t>(bytes.size(), 64))
    throw Error(Errc::ChecksumMismatch, "checkpoint truncated before its version tag");
  const std::string tag(bytes.begin(), nl);
  if (tag != kCheckpointTag) throw Error(Errc::VersionMismatch, "unsupported checkpoint version '" + tag + "'");
  if (bytes.size() < tag.size() + 1 + 4 + 32) throw Error(Errc::ChecksumMismatch, "checkpoint truncated");
  const auto body = bytes.first(bytes.size() - 32);
  const auto digest = sha256(body);
  if (!std::equal(digest.begin(), digest.end(), bytes.end() - 32))
    throw Error(Errc::ChecksumMismatch, "checkpoint checksum does not match");

  std::size_t pos = tag.size() + 1;
  const std::uint32_t hlen = get_u32(bytes.data() + pos);
  pos += 4;
  if (pos + hlen > body.size()) throw Error(Errc::BadModel, "checkpoint header overruns the file");
  json header;
  try {
    header = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + hlen));
  } catch (const json::exception& e) {
    throw Error(Errc::BadModel, std::string("checkpoint header: ") + e.what());
  }
  pos += hlen;
  try {
    const auto& domains = header.at("domains");
    for (int d = 0; d < kNumDomains; ++d)
      if (domains.at(static_cast<std::size_t>(d)).get<std::string>() != kDomainNames[static_cast<std::size_t>(d)])
        throw Error(Errc::BadModel, "checkpoint domain order differs");
    GanState s = init_state(config_from_json(header.at("config")));
    s.step = header.at("step").get<long>();
    std::istringstream rng(header.at("rng").get<std::string>());
    rng >> s.rng;
    if (!rng) throw Error(Errc::BadModel, "bad rng state in checkpoint");
    auto bufs = buffers(s);
    const auto& table = header.at("tensors");
    if (table.size() != bufs.size()) throw Error(Errc::BadModel, "checkpoint tensor table does not match config");
    const std::size_t data_size = body.size() - pos;
    for (std::size_t i = 0; i < bufs.size(); ++i) {
      const auto& t = table[i];
      if (t.at("name").get<std::string>() != bufs[i].name || t.at("shape").get<std::vector<int>>() != bufs[i].shape ||
          t.at("dtype").get<std::string>() != "f32" || t.at("count").get<std::size_t>() != bufs[i].data->size())
        throw Error(Errc::BadModel, "checkpoint tensor '" + t.at("name").get<std::string>() + "' does not match");
      const std::size_t off = t.at("offset").get<std::size_t>();
      if (off + bufs[i].data->size() * 4 > data_size) throw Error(Errc::BadModel, "tensor data overruns the file");
      const std::uint8_t* p = body.data() + pos + off;
      for (std::size_t k = 0; k < bufs[i].data->size(); ++k)
        (*bufs[i].data)[k] = std::bit_cast<float>(get_u32(p + 4 * k));
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(Errc::BadModel, std::string("checkpoint header: ") + e.what());
  }
}

void save_checkpoint(const GanState& state, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(state));
}

GanState load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

Image synthesize(const GanState& state, const Image& face, ExpressionDomain d) {
  if (face.width != face::kFaceSize || face.height != face::kFaceSize || face.channels != 3)
    throw Error(Errc::BadShape, "synthesize expects a 128x128x3 face");
  const int domain[1] = {code(d)};
  return to_image(generator_forward(state.generator, to_tensor(face), domain));
}

double domain_agreement(const GanState& state, const FaceDataset& data, int count, std::uint64_t seed) {
  if (count < 1 || data.images.empty()) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.images.size() - 1);
  std::uniform_int_distribution<int> domain(0, kNumDomains - 1);
  const int s = data.image_size;
  int agree = 0;
  for (int start = 0; start < count; start += 16) {
    const int n = std::min(16, count - start);
    Tensor<float> x(n, 3, s, s);
    std::vector<int> targets(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const auto& img = data.images[pick(rng)];
      std::copy(img.begin(), img.end(), x.sample(i));
      targets[static_cast<std::size_t>(i)] = domain(rng);
    }
    const Tensor<float> fake = generator_forward(state.generator, x, targets);
    const Tensor<float> logits = state.discriminator.forward(fake, nullptr).logits;
    for (int i = 0; i < n; ++i) {
      const float* z = logits.sample(i);
      const int best = static_cast<int>(std::max_element(z, z + kNumDomains) - z);
      if (best == targets[static_cast<std::size_t>(i)]) ++agree;
    }
  }
  return static_cast<double>(agree) / count;
}

}  // namespace emo::gan
