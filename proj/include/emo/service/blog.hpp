#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "emo/service/pipeline.hpp"

namespace emo::service {

/// Content-addressed PNG blobs under `<root>/blobs/<sha256>.png`.
class ContentStore {
 public:
  explicit ContentStore(std::filesystem::path root);

  /// Encodes as PNG, writes it unless already present, returns the hash.
  std::string put(const Image& img);
  bool contains(const std::string& hash) const;
  std::vector<std::uint8_t> get(const std::string& hash) const;  // IoError if absent
  Image get_image(const std::string& hash) const;
  std::filesystem::path blob_path(const std::string& hash) const;
  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path root_;
};

struct UserRecord {
  std::string id;
  std::string name;
  std::optional<std::string> original_photo;
  std::optional<std::string> prepped_face;
  std::optional<std::string> current_avatar;
  std::optional<EmotionLabel> current_emotion;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

struct PostRecord {
  std::string id;
  std::string user_id;
  std::string text;
  EmotionLabel emotion = EmotionLabel::Happy;
  std::vector<double> probabilities;
  bool low_confidence = false;
  ExpressionDomain domain = ExpressionDomain::Neutral;
  std::string avatar;
  std::int64_t created_at = 0;  // milliseconds since the Unix epoch

  friend bool operator==(const PostRecord&, const PostRecord&) = default;
};

/// The whole metadata document; replaced as a unit.
struct StoreSnapshot {
  std::map<std::string, UserRecord> users;
  std::vector<PostRecord> posts;  // append order (oldest first)
};

struct ConsistencyReport {
  std::vector<std::string> problems;
  bool ok() const noexcept { return problems.empty(); }
};

/// The demo blog: users, profile photos, posts, avatars. Persisted as blobs
/// plus `<root>/meta.json`, replaced atomically on every change.
class BlogService {
 public:
  BlogService(std::filesystem::path root, std::shared_ptr<const Models> models);

  UserRecord create_user(const std::string& name);
  UserRecord set_photo(const std::string& user_id, std::span<const std::uint8_t> image_bytes);
  std::pair<PostRecord, UserRecord> create_post(const std::string& user_id, const std::string& text);
  UserRecord get_profile(const std::string& user_id) const;
  std::vector<PostRecord> list_posts(const std::string& user_id) const;  // newest first

  ConsistencyReport check_consistency() const;
  std::shared_ptr<const StoreSnapshot> snapshot() const;
  const ContentStore& content() const noexcept { return store_; }
  const Models& models() const noexcept { return *models_; }

 private:
  std::mutex& user_mutex(const std::string& user_id);
  template <typename F>
  void commit(F&& mutate);
  std::string fresh_id(const char* prefix);

  std::filesystem::path root_;
  ContentStore store_;
  std::shared_ptr<const Models> models_;

  mutable std::mutex snapshot_mutex_;  // guards the pointer only
  std::shared_ptr<const StoreSnapshot> snapshot_;
  std::mutex writer_mutex_;  // one metadata writer at a time
  std::mutex users_mutex_;   // guards user_locks_
  std::map<std::string, std::unique_ptr<std::mutex>> user_locks_;
  std::mutex id_mutex_;
  std::mt19937_64 id_rng_;
  std::int64_t last_timestamp_ = 0;
};

std::string store_to_json(const StoreSnapshot& s);
StoreSnapshot store_from_json(std::string_view text);

}  // namespace emo::service
