#include "emo/service/config.hpp"

#include <cstdlib>

#include <toml.hpp>

#include "emo/core/error.hpp"
#include "emo/core/io.hpp"

namespace emo::service {

std::optional<std::string> process_env(std::string_view name) {
  const char* v = std::getenv(std::string(name).c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

namespace {

template <typename T>
void read(const toml::table& doc, std::string_view path, T& out) {
  const toml::node_view<const toml::node> node = doc.at_path(path);
  if (!node) return;
  if constexpr (std::is_same_v<T, std::filesystem::path>) {
    const auto v = node.value<std::string>();
    if (!node.is_string() || !v) throw Error(Errc::BadConfig, std::string(path) + " must be a string");
    out = *v;
  } else if constexpr (std::is_same_v<T, double>) {
    const auto v = node.value<double>();
    if (!v) throw Error(Errc::BadConfig, std::string(path) + " must be a number");
    out = *v;
  } else if constexpr (std::is_integral_v<T>) {
    const auto v = node.value<std::int64_t>();
    if (!node.is_integer() || !v) throw Error(Errc::BadConfig, std::string(path) + " must be an integer");
    out = static_cast<T>(*v);
  } else {
    const auto v = node.value<std::string>();
    if (!node.is_string() || !v) throw Error(Errc::BadConfig, std::string(path) + " must be a string");
    out = *v;
  }
}

double parse_double(const std::string& name, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(Errc::BadConfig, name + " is not a number: " + v);
  }
}

}  // namespace

ServiceConfig parse_service_config(std::string_view toml_text, const EnvLookup& env) {
  ServiceConfig c;
  toml::table doc;
  try {
    doc = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw Error(Errc::BadConfig, std::string("config parse error: ") + std::string(e.description()));
  }
  read(doc, "models.classifier", c.classifier_model);
  read(doc, "models.gan", c.gan_checkpoint);
  read(doc, "models.cascade", c.cascade);
  read(doc, "store.root", c.store_root);
  read(doc, "server.host", c.host);
  read(doc, "server.port", c.port);
  read(doc, "server.max_upload_bytes", c.max_upload_bytes);
  read(doc, "server.static_dir", c.static_dir);
  read(doc, "pipeline.confidence_threshold", c.confidence_threshold);
  c.emotion_map = mapping::EmotionMap::from_toml(toml_text);

  if (auto v = env("EMO_CLASSIFIER_MODEL")) c.classifier_model = *v;
  if (auto v = env("EMO_GAN_CHECKPOINT")) c.gan_checkpoint = *v;
  if (auto v = env("EMO_CASCADE")) c.cascade = *v;
  if (auto v = env("EMO_STORE_ROOT")) c.store_root = *v;
  if (auto v = env("EMO_HOST")) c.host = *v;
  if (auto v = env("EMO_PORT")) {
    const double p = parse_double("EMO_PORT", *v);
    if (p != static_cast<int>(p)) throw Error(Errc::BadConfig, "EMO_PORT must be an integer");
    c.port = static_cast<int>(p);
  }
  if (auto v = env("EMO_CONFIDENCE_THRESHOLD")) c.confidence_threshold = parse_double("EMO_CONFIDENCE_THRESHOLD", *v);

  if (c.port < 0 || c.port > 65535) throw Error(Errc::BadConfig, "port out of range");
  if (!(c.confidence_threshold >= 0.0 && c.confidence_threshold <= 1.0))
    throw Error(Errc::BadConfig, "confidence_threshold must lie in [0, 1]");
  return c;
}

ServiceConfig load_service_config(const std::filesystem::path& path, const EnvLookup& env) {
  return parse_service_config(read_text_file(path), env);
}

}  // namespace emo::service
