#include "emo/service/blog.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "emo/classifier/recurrent.hpp"
#include "emo/core/error.hpp"
#include "emo/core/io.hpp"

namespace emo::service {

using nlohmann::json;

namespace {

constexpr std::string_view kStoreFormat = "emostore/1";

bool is_hash(const std::string& h) {
  return h.size() == 64 && std::all_of(h.begin(), h.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::string> opt_str(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

// ---- ContentStore ----

ContentStore::ContentStore(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_ / "blobs");
}

std::filesystem::path ContentStore::blob_path(const std::string& hash) const {
  return root_ / "blobs" / (hash + ".png");
}

std::string ContentStore::put(const Image& img) {
  const std::vector<std::uint8_t> bytes = encode_png(img);
  const std::string hash = sha256_hex(bytes);
  if (!std::filesystem::exists(blob_path(hash))) write_file_atomic(blob_path(hash), bytes);
  return hash;
}

bool ContentStore::contains(const std::string& hash) const {
  return is_hash(hash) && std::filesystem::exists(blob_path(hash));
}

std::vector<std::uint8_t> ContentStore::get(const std::string& hash) const {
  if (!is_hash(hash)) throw Error(Errc::IoError, "not a content hash: " + hash);
  return read_file(blob_path(hash));
}

Image ContentStore::get_image(const std::string& hash) const { return decode_image(get(hash)); }

// ---- metadata (de)serialization ----

std::string store_to_json(const StoreSnapshot& s) {
  json users = json::array();
  for (const auto& [id, u] : s.users) {
    users.push_back({{"id", u.id},
                     {"name", u.name},
                     {"original_photo", opt(u.original_photo)},
                     {"prepped_face", opt(u.prepped_face)},
                     {"current_avatar", opt(u.current_avatar)},
                     {"current_emotion", u.current_emotion ? json(std::string(to_string(*u.current_emotion)))
                                                           : json(nullptr)}});
  }
  json posts = json::array();
  for (const auto& p : s.posts) {
    posts.push_back({{"id", p.id},
                     {"user_id", p.user_id},
                     {"text", p.text},
                     {"emotion", std::string(to_string(p.emotion))},
                     {"probabilities", p.probabilities},
                     {"low_confidence", p.low_confidence},
                     {"domain", std::string(to_string(p.domain))},
                     {"avatar", p.avatar},
                     {"created_at", p.created_at}});
  }
  return json{{"format", kStoreFormat}, {"users", users}, {"posts", posts}}.dump(1);
}

StoreSnapshot store_from_json(std::string_view text) {
  StoreSnapshot s;
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kStoreFormat)
      throw Error(Errc::VersionMismatch, "unsupported store format");
    for (const auto& j : doc.at("users")) {
      UserRecord u;
      u.id = j.at("id").get<std::string>();
      u.name = j.at("name").get<std::string>();
      u.original_photo = opt_str(j, "original_photo");
      u.prepped_face = opt_str(j, "prepped_face");
      u.current_avatar = opt_str(j, "current_avatar");
      if (auto e = opt_str(j, "current_emotion")) {
        const auto label = parse_emotion(*e);
        if (!label) throw Error(Errc::BadModel, "unknown emotion in store: " + *e);
        u.current_emotion = *label;
      }
      s.users[u.id] = std::move(u);
    }
    for (const auto& j : doc.at("posts")) {
      PostRecord p;
      p.id = j.at("id").get<std::string>();
      p.user_id = j.at("user_id").get<std::string>();
      p.text = j.at("text").get<std::string>();
      const auto e = parse_emotion(j.at("emotion").get<std::string>());
      const auto d = parse_domain(j.at("domain").get<std::string>());
      if (!e || !d) throw Error(Errc::BadModel, "bad label in stored post " + p.id);
      p.emotion = *e;
      p.domain = *d;
      p.probabilities = j.at("probabilities").get<std::vector<double>>();
      p.low_confidence = j.at("low_confidence").get<bool>();
      p.avatar = j.at("avatar").get<std::string>();
      p.created_at = j.at("created_at").get<std::int64_t>();
      s.posts.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::BadModel, std::string("store metadata: ") + e.what());
  }
  return s;
}

// ---- BlogService ----

BlogService::BlogService(std::filesystem::path root, std::shared_ptr<const Models> models)
    : root_(std::move(root)), store_(root_), models_(std::move(models)), id_rng_(std::random_device{}()) {
  if (!models_) models_ = std::make_shared<const Models>();
  const auto meta = root_ / "meta.json";
  auto snap = std::make_shared<StoreSnapshot>();
  if (std::filesystem::exists(meta)) *snap = store_from_json(read_text_file(meta));
  for (const auto& p : snap->posts) last_timestamp_ = std::max(last_timestamp_, p.created_at);
  snapshot_ = std::move(snap);
}

std::shared_ptr<const StoreSnapshot> BlogService::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

std::mutex& BlogService::user_mutex(const std::string& user_id) {
  std::lock_guard lock(users_mutex_);
  auto& m = user_locks_[user_id];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

std::string BlogService::fresh_id(const char* prefix) {
  std::lock_guard lock(id_mutex_);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%016llx", prefix, static_cast<unsigned long long>(id_rng_()));
  return buf;
}

// Copy-on-write: mutate a copy, persist it, then publish it.
template <typename F>
void BlogService::commit(F&& mutate) {
  std::lock_guard writer(writer_mutex_);
  auto next = std::make_shared<StoreSnapshot>(*snapshot());
  mutate(*next);
  write_file_atomic(root_ / "meta.json", store_to_json(*next));
  std::lock_guard lock(snapshot_mutex_);
  snapshot_ = std::move(next);
}

UserRecord BlogService::create_user(const std::string& name) {
  if (name.empty()) throw Error(Errc::EmptyName, "user name must not be empty");
  UserRecord u;
  u.name = name;
  commit([&](StoreSnapshot& s) {
    do u.id = fresh_id("u_");
    while (s.users.count(u.id));
    s.users[u.id] = u;
  });
  return u;
}

UserRecord BlogService::get_profile(const std::string& user_id) const {
  const auto snap = snapshot();
  const auto it = snap->users.find(user_id);
  if (it == snap->users.end()) throw Error(Errc::UnknownUser, "unknown user " + user_id);
  return it->second;
}

std::vector<PostRecord> BlogService::list_posts(const std::string& user_id) const {
  const auto snap = snapshot();
  if (!snap->users.count(user_id)) throw Error(Errc::UnknownUser, "unknown user " + user_id);
  std::vector<PostRecord> out;
  for (auto it = snap->posts.rbegin(); it != snap->posts.rend(); ++it)
    if (it->user_id == user_id) out.push_back(*it);
  return out;
}

UserRecord BlogService::set_photo(const std::string& user_id, std::span<const std::uint8_t> image_bytes) {
  std::lock_guard user_lock(user_mutex(user_id));
  get_profile(user_id);
  const Image photo = to_rgb(decode_image(image_bytes));
  const std::string original = store_.put(photo);
  if (!models_->cascade) throw Error(Errc::ModelNotLoaded, "face cascade is not loaded");
  std::optional<Image> prepped;
  std::optional<Error> failure;
  try {
    prepped = face::prep_face(photo, *models_->cascade, models_->prep);
  } catch (const Error& e) {
    if (e.code() != Errc::NoFaceDetected) throw;
    failure = e;
  }
  const std::optional<std::string> prepped_hash =
      prepped ? std::optional<std::string>(store_.put(*prepped)) : std::nullopt;
  UserRecord updated;
  commit([&](StoreSnapshot& s) {
    UserRecord& u = s.users.at(user_id);
    u.original_photo = original;
    if (prepped_hash) {
      u.prepped_face = prepped_hash;
      u.current_avatar = prepped_hash;
      u.current_emotion.reset();
    }
    updated = u;
  });
  if (failure) throw *failure;
  return updated;
}

std::pair<PostRecord, UserRecord> BlogService::create_post(const std::string& user_id, const std::string& text) {
  std::lock_guard user_lock(user_mutex(user_id));
  const UserRecord user = get_profile(user_id);
  if (!user.prepped_face) throw Error(Errc::NoPhotoOnProfile, "user " + user_id + " has no profile photo");
  // Always from the prepped source, never from the previous avatar.
  const Image prepped = to_rgb(store_.get_image(*user.prepped_face));
  TransferResult r = transfer_emotion_prepped(text, prepped, *models_);
  PostRecord post;
  post.user_id = user_id;
  post.text = text;
  post.emotion = r.emotion;
  post.probabilities = r.probabilities;
  post.low_confidence = r.low_confidence;
  post.domain = r.domain;
  post.avatar = store_.put(r.face);
  UserRecord updated;
  commit([&](StoreSnapshot& s) {
    do post.id = fresh_id("p_");
    while (std::any_of(s.posts.begin(), s.posts.end(), [&](const PostRecord& p) { return p.id == post.id; }));
    last_timestamp_ = std::max(now_ms(), last_timestamp_ + 1);
    post.created_at = last_timestamp_;
    s.posts.push_back(post);
    UserRecord& u = s.users.at(user_id);
    u.current_avatar = post.avatar;
    u.current_emotion = post.emotion;
    updated = u;
  });
  return {post, updated};
}

ConsistencyReport BlogService::check_consistency() const {
  ConsistencyReport r;
  const auto snap = snapshot();
  auto check_blob = [&](const std::string& what, const std::string& hash) {
    if (!store_.contains(hash)) {
      r.problems.push_back(what + " references missing blob " + hash);
      return;
    }
    if (sha256_hex(store_.get(hash)) != hash) r.problems.push_back(what + " blob " + hash + " fails its hash");
  };
  for (const auto& [id, u] : snap->users) {
    if (u.current_avatar && !u.prepped_face) r.problems.push_back("user " + id + " has an avatar but no prepped face");
    for (const auto* h : {&u.original_photo, &u.prepped_face, &u.current_avatar})
      if (*h) check_blob("user " + id, **h);
  }
  std::int64_t prev = 0;
  for (const auto& p : snap->posts) {
    if (!snap->users.count(p.user_id)) r.problems.push_back("post " + p.id + " has unknown user " + p.user_id);
    check_blob("post " + p.id, p.avatar);
    if (p.probabilities.size() != kNumEmotions ||
        classifier::argmax(Eigen::Map<const Eigen::VectorXd>(p.probabilities.data(), kNumEmotions)) !=
            code(p.emotion))
      r.problems.push_back("post " + p.id + " emotion is not the argmax of its probabilities");
    if (p.created_at <= prev) r.problems.push_back("post " + p.id + " timestamp is not increasing");
    prev = p.created_at;
  }
  return r;
}

}  // namespace emo::service
