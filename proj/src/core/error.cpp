#include "emo/core/error.hpp"

namespace emo {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::IoError: return "IoError";
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::UnknownWord: return "UnknownWord";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::EmptySplit: return "EmptySplit";
    case Errc::BadCorpus: return "BadCorpus";
    case Errc::BadModel: return "BadModel";
    case Errc::DegenerateBox: return "DegenerateBox";
    case Errc::NoFaceDetected: return "NoFaceDetected";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::BadCascade: return "BadCascade";
    case Errc::BadShape: return "BadShape";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::BadConfig: return "BadConfig";
    case Errc::UnknownUser: return "UnknownUser";
    case Errc::EmptyName: return "EmptyName";
    case Errc::UndecodableImage: return "UndecodableImage";
    case Errc::NoPhotoOnProfile: return "NoPhotoOnProfile";
    case Errc::ModelNotLoaded: return "ModelNotLoaded";
  }
  return "Unknown";
}

}  // namespace emo
