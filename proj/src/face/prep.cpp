#include <algorithm>
#include <nlohmann/json.hpp>
#include <optional>

#include "emo/core/error.hpp"
#include "emo/core/io.hpp"
#include "emo/face/preprocess.hpp"
#include "emo/gan/domain.hpp"

namespace emo::face {
namespace fs = std::filesystem;

Image prep_face(const Image& img, const CascadeModel& cascade, const PrepConfig& cfg) {
  const auto faces = detect_faces(img, cascade, cfg.scale_factor, cfg.min_neighbors);
  if (faces.empty()) throw Error(Errc::NoFaceDetected, "no face detected");
  const BoundingBox box = expand_box(faces.front(), cfg.expand, img.width, img.height);
  return histogram_equalize(crop_resize(img, box, cfg.size));
}

int DatasetManifest::total() const {
  int n = 0;
  for (const auto& [d, c] : counts) n += c;
  return n;
}

namespace {

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

struct Job {
  std::string domain;
  fs::path source;
};

struct Outcome {
  std::optional<Image> face;
  std::string error;
};

}  // namespace

DatasetManifest build_dataset(const fs::path& raw_dir, const CascadeModel& cascade,
                              const fs::path& out_dir, const PrepConfig& cfg) {
  if (!fs::is_directory(raw_dir)) throw Error(Errc::IoError, "not a directory: " + raw_dir.string());
  std::vector<Job> jobs;
  DatasetManifest manifest;
  manifest.cascade_sha256 = cascade.sha256;
  manifest.params = cfg;
  for (auto name : kDomainNames) {
    manifest.counts[std::string(name)] = 0;
    const fs::path dir = raw_dir / name;
    if (!fs::is_directory(dir)) continue;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (auto& f : files) jobs.push_back({std::string(name), f});
  }

  std::vector<Outcome> outcomes(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      outcomes[i].face = prep_face(read_image(jobs[i].source), cascade, cfg);
    } catch (const Error& e) {
      outcomes[i].error = std::string(e.name());
    }
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto rel = fs::relative(jobs[i].source, raw_dir).generic_string();
    if (!outcomes[i].face) {
      manifest.skipped.push_back({rel, outcomes[i].error});
      continue;
    }
    const fs::path dir = out_dir / jobs[i].domain;
    fs::create_directories(dir);
    write_png(dir / (jobs[i].source.stem().string() + ".png"), *outcomes[i].face);
    ++manifest.counts[jobs[i].domain];
  }

  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : manifest.skipped) skipped.push_back({{"file", s.file}, {"reason", s.reason}});
  const nlohmann::json doc = {
      {"domains", manifest.counts},
      {"total", manifest.total()},
      {"skipped", skipped},
      {"cascade_sha256", manifest.cascade_sha256},
      {"params",
       {{"size", cfg.size},
        {"scale_factor", cfg.scale_factor},
        {"min_neighbors", cfg.min_neighbors},
        {"expand", cfg.expand}}},
  };
  fs::create_directories(out_dir);
  write_file_atomic(out_dir / "manifest.json", doc.dump(2) + "\n");
  if (manifest.total() == 0) throw Error(Errc::EmptyDataset, "no image could be prepared");
  return manifest;
}

}  // namespace emo::face
