#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emo {

enum class Errc {
  IoError,
  MalformedLine,
  UnknownWord,
  ShapeMismatch,
  EmptyCorpus,
  EmptySplit,
  BadCorpus,
  BadModel,
  DegenerateBox,
  NoFaceDetected,
  EmptyDataset,
  BadCascade,
  BadShape,
  VersionMismatch,
  ChecksumMismatch,
  BadConfig,
  UnknownUser,
  EmptyName,
  UndecodableImage,
  NoPhotoOnProfile,
  ModelNotLoaded,
};

/// Stable error name, as surfaced by the CLI and the HTTP error envelope.
std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }
  std::string_view name() const noexcept { return errc_name(code_); }

 private:
  Errc code_;
};

/// Carries the offending 1-based line number (0 when no line could be read).
class MalformedLineError : public Error {
 public:
  MalformedLineError(std::size_t line_no, const std::string& detail)
      : Error(Errc::MalformedLine,
              "MalformedLine(" + std::to_string(line_no) + "): " + detail),
        line_no_(line_no) {}

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

}  // namespace emo
