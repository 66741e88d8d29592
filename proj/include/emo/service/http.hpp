#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "emo/core/error.hpp"
#include "emo/service/blog.hpp"

namespace emo::service {

/// JSON views used by the HTTP API.
std::string user_json(const UserRecord& u);
std::string post_json(const PostRecord& p);

/// HTTP status and envelope code for an error.
struct HttpError {
  int status;
  std::string code;
};
HttpError http_error_for(Errc code);

/// The blog HTTP API over a BlogService.
class ApiServer {
 public:
  ApiServer(BlogService& blog, std::size_t max_upload_bytes, std::filesystem::path static_dir = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds a free port (returned) without serving yet.
  int bind_any_port(const std::string& host);
  bool bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen_after_bind();
  void stop();
  bool is_running() const;
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace emo::service
