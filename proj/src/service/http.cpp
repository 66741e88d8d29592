#include "emo/service/http.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "emo/core/error.hpp"

namespace emo::service {

using nlohmann::json;

namespace {

json user_to_json(const UserRecord& u) {
  auto opt = [](const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); };
  return {{"id", u.id},
          {"name", u.name},
          {"original_photo", opt(u.original_photo)},
          {"prepped_face", opt(u.prepped_face)},
          {"current_avatar", opt(u.current_avatar)},
          {"current_emotion", u.current_emotion ? json(std::string(to_string(*u.current_emotion))) : json(nullptr)}};
}

json post_to_json(const PostRecord& p) {
  return {{"id", p.id},
          {"user_id", p.user_id},
          {"text", p.text},
          {"emotion", std::string(to_string(p.emotion))},
          {"probabilities", p.probabilities},
          {"low_confidence", p.low_confidence},
          {"domain", std::string(to_string(p.domain))},
          {"avatar", p.avatar},
          {"created_at", p.created_at}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

/// Runs a handler, turning errors into the JSON envelope.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    const HttpError h = http_error_for(e.code());
    send_error(res, h.status, h.code, e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

}  // namespace

std::string user_json(const UserRecord& u) { return user_to_json(u).dump(); }
std::string post_json(const PostRecord& p) { return post_to_json(p).dump(); }

HttpError http_error_for(Errc code) {
  switch (code) {
    case Errc::EmptyName: return {400, "empty_name"};
    case Errc::UndecodableImage: return {400, "undecodable"};
    case Errc::UnknownUser: return {404, "unknown_user"};
    case Errc::NoPhotoOnProfile: return {409, "no_photo"};
    case Errc::NoFaceDetected: return {422, "no_face"};
    case Errc::ModelNotLoaded: return {503, "model_not_loaded"};
    case Errc::IoError: return {404, "not_found"};
    default: return {500, "internal"};
  }
}

struct ApiServer::Impl {
  explicit Impl(BlogService& b) : blog(b) {}
  BlogService& blog;
  httplib::Server server;
};

ApiServer::ApiServer(BlogService& blog, std::size_t max_upload_bytes, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(blog)) {
  auto& srv = impl_->server;
  BlogService& b = impl_->blog;
  srv.set_payload_max_length(max_upload_bytes);
  if (!static_dir.empty()) srv.set_mount_point("/", static_dir.string());

  srv.Post("/api/users", [&b](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      const UserRecord u = b.create_user(body.at("name").get<std::string>());
      send_json(res, 201, {{"user", user_to_json(u)}});
    });
  });

  srv.Put(R"(/api/users/([^/]+)/photo)", [&b](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string bytes;
      if (req.is_multipart_form_data()) {
        if (req.has_file("photo")) {
          bytes = req.get_file_value("photo").content;
        } else if (!req.files.empty()) {
          bytes = req.files.begin()->second.content;
        }
      } else {
        bytes = req.body;
      }
      const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
      const UserRecord u = b.set_photo(req.matches[1], std::span<const std::uint8_t>(p, bytes.size()));
      send_json(res, 200, {{"user", user_to_json(u)}});
    });
  });

  srv.Post(R"(/api/users/([^/]+)/posts)", [&b](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      const auto [post, user] = b.create_post(req.matches[1], body.at("text").get<std::string>());
      send_json(res, 201, {{"post", post_to_json(post)}, {"user", user_to_json(user)}});
    });
  });

  srv.Get(R"(/api/users/([^/]+))", [&b](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, {{"user", user_to_json(b.get_profile(req.matches[1]))}}); });
  });

  srv.Get(R"(/api/users/([^/]+)/posts)", [&b](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json posts = json::array();
      for (const auto& p : b.list_posts(req.matches[1])) posts.push_back(post_to_json(p));
      send_json(res, 200, {{"posts", posts}});
    });
  });

  srv.Get(R"(/api/images/([0-9a-f]{64}))", [&b](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string hash = req.matches[1];
      if (!b.content().contains(hash)) throw Error(Errc::IoError, "no image " + hash);
      const auto bytes = b.content().get(hash);
      res.set_header("Cache-Control", "public, max-age=31536000, immutable");
      res.set_header("ETag", "\"" + hash + "\"");
      res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
    });
  });

  srv.Get("/api/health", [&b](const httplib::Request&, httplib::Response& res) {
    const Models& m = b.models();
    send_json(res, 200,
              {{"models",
                {{"classifier", m.classifier ? "loaded" : "missing"},
                 {"gan", m.gan ? "loaded" : "missing"},
                 {"cascade", m.cascade ? "loaded" : "missing"}}}});
  });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool ApiServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }
bool ApiServer::listen_after_bind() { return impl_->server.listen_after_bind(); }
void ApiServer::stop() { impl_->server.stop(); }
bool ApiServer::is_running() const { return impl_->server.is_running(); }
void ApiServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace emo::service
