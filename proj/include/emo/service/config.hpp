#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "emo/mapping/emotion_map.hpp"

namespace emo::service {

struct ServiceConfig {
  std::filesystem::path classifier_model;
  std::filesystem::path gan_checkpoint;
  std::filesystem::path cascade;
  std::filesystem::path store_root = "emo-store";
  std::string host = "127.0.0.1";
  int port = 8080;
  double confidence_threshold = 0.25;
  std::size_t max_upload_bytes = 10 * 1024 * 1024;
  std::filesystem::path static_dir;  // optional UI bundle
  mapping::EmotionMap emotion_map;
};

using EnvLookup = std::function<std::optional<std::string>(std::string_view)>;

/// Process environment.
std::optional<std::string> process_env(std::string_view name);

/// TOML sections [models] classifier/gan/cascade, [store] root,
/// [server] host/port/max_upload_bytes/static_dir, [pipeline]
/// confidence_threshold, [emotion_map]. Variables EMO_CLASSIFIER_MODEL,
/// EMO_GAN_CHECKPOINT, EMO_CASCADE, EMO_STORE_ROOT, EMO_HOST, EMO_PORT and
/// EMO_CONFIDENCE_THRESHOLD override the file. Throws BadConfig.
ServiceConfig parse_service_config(std::string_view toml_text, const EnvLookup& env = process_env);
ServiceConfig load_service_config(const std::filesystem::path& path, const EnvLookup& env = process_env);

}  // namespace emo::service
