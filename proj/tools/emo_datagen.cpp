// Writes the bundled synthetic corpus, word vectors and face set.
#include <CLI11.hpp>

#include <iostream>

#include "emo/core/error.hpp"
#include "emo/core/io.hpp"
#include "emo/datagen/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic training data"};
  std::string corpus, vectors, faces;
  std::uint64_t seed = 20240611;
  int per_class = 100, per_domain = 40, dim = 50, size = 64;
  app.add_option("--corpus", corpus, "Output CSV for the labeled text corpus");
  app.add_option("--vectors", vectors, "Output word-vector text file");
  app.add_option("--faces", faces, "Output directory for the face set");
  app.add_option("--per-class", per_class, "Sentences per emotion")->capture_default_str();
  app.add_option("--per-domain", per_domain, "Faces per expression")->capture_default_str();
  app.add_option("--dim", dim, "Vector dimension")->capture_default_str();
  app.add_option("--size", size, "Face image size")->capture_default_str();
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    if (!corpus.empty())
      emo::write_file_atomic(corpus, emo::classifier::write_corpus_csv(emo::datagen::synthetic_corpus(seed, per_class)));
    if (!vectors.empty()) emo::write_file_atomic(vectors, emo::datagen::synthetic_vectors(seed, dim));
    if (!faces.empty()) emo::datagen::write_face_set(faces, per_domain, seed, size);
  } catch (const emo::Error& e) {
    std::cerr << e.name() << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}
