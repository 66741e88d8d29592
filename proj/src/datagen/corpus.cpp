#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "emo/datagen/synthetic.hpp"
#include "emo/text/normalizer.hpp"

namespace emo::datagen {
namespace {

const std::vector<std::string> kOpeners = {
    "i'm",           "i am",        "honestly i feel", "today i feel",     "right now i'm",
    "this morning i was", "i have been", "my sister says i'm", "tonight i feel", "lately i am",
    "at work i was", "i keep feeling"};

const std::vector<std::string> kTails = {
    "",           "today",          "about the exam", "after work",   "with my family", "again",
    "at the party", "this week",    "on the bus",     "all evening",  "because of the news",
    "since yesterday"};

// Indexed by EmotionLabel code.
const std::vector<std::vector<std::string>> kCores = {
    {"happy", "so glad", "delighted", "joyful", "cheerful", "thrilled and grateful", "over the moon",
     "in a great mood", "smiling all day", "excited"},
    {"not feeling well", "not feeling well at all", "sad", "so down", "heartbroken", "lonely", "miserable",
     "depressed", "gloomy", "hopeless", "crying"},
    {"angry", "furious", "so mad", "annoyed", "irritated", "outraged", "livid", "fed up", "boiling with rage",
     "frustrated"},
    {"scared", "afraid", "terrified", "frightened", "nervous", "anxious", "panicking", "worried sick",
     "trembling", "petrified"},
    {"ashamed", "embarrassed", "humiliated", "guilty", "mortified", "so foolish", "regretful", "disgraced",
     "red faced", "sorry for what i did"},
    {"disgusted", "grossed out", "revolted", "sickened", "repulsed", "nauseated", "appalled", "it was gross",
     "it smelled awful", "repelled"},
    {"surprised", "shocked", "amazed", "astonished", "stunned", "speechless", "caught off guard",
     "in disbelief", "startled", "blown away"}};

const std::vector<std::string> kFiller = {
    "the", "a", "an", "and", "or", "but", "of", "to", "in", "on", "at", "for", "with", "is", "was",
    "it", "that", "this", "my", "your", "we", "they", "he", "she", "you", "me", "very", "really",
    "day", "night", "home", "school", "friend", "friends", "dog", "cat", "movie", "music", "food",
    "weather", "rain", "sun", "city", "car", "phone", "book", "game", "dinner", "coffee", "walk"};

}  // namespace

std::vector<classifier::LabeledItem> synthetic_corpus(std::uint64_t seed, int per_class) {
  std::mt19937_64 rng(seed);
  std::vector<classifier::LabeledItem> items;
  std::set<std::string> seen;
  for (int e = 0; e < kNumEmotions; ++e) {
    const auto& cores = kCores[static_cast<std::size_t>(e)];
    std::uniform_int_distribution<std::size_t> op(0, kOpeners.size() - 1), co(0, cores.size() - 1),
        ta(0, kTails.size() - 1);
    int made = 0;
    while (made < per_class) {
      std::string text = kOpeners[op(rng)] + " " + cores[co(rng)];
      const std::string& tail = kTails[ta(rng)];
      if (!tail.empty()) text += " " + tail;
      if (!seen.insert(text).second) continue;
      items.push_back({text, static_cast<EmotionLabel>(e)});
      ++made;
    }
  }
  return items;
}

std::string synthetic_vectors(std::uint64_t seed, int dim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_unit = [&] {
    std::vector<double> v(static_cast<std::size_t>(dim));
    double norm = 0.0;
    for (double& x : v) {
      x = normal(rng);
      norm += x * x;
    }
    for (double& x : v) x /= std::sqrt(norm);
    return v;
  };
  std::vector<std::vector<double>> class_dir;
  for (int e = 0; e < kNumEmotions; ++e) class_dir.push_back(random_unit());

  // A token carries its class direction only when it occurs in the core
  // phrases of exactly one class and nowhere else.
  std::map<std::string, std::set<int>> owners;
  std::vector<std::string> order;
  auto note = [&](const std::string& phrase, int e) {
    for (const auto& tok : text::normalize(phrase)) {
      auto [it, fresh] = owners.try_emplace(tok);
      if (fresh) order.push_back(tok);
      it->second.insert(e);
    }
  };
  for (int e = 0; e < kNumEmotions; ++e)
    for (const auto& c : kCores[static_cast<std::size_t>(e)]) note(c, e);
  for (const auto& o : kOpeners) note(o, -1);
  for (const auto& t : kTails) note(t, -1);
  for (const auto& f : kFiller) note(f, -1);
  std::vector<std::pair<std::string, int>> words;
  for (const auto& w : order) {
    const auto& o = owners[w];
    words.emplace_back(w, o.size() == 1 ? *o.begin() : -1);
  }

  std::ostringstream out;
  out << std::fixed << std::setprecision(5);
  for (const auto& [word, e] : words) {
    out << word;
    const std::vector<double> noise = random_unit();
    for (int k = 0; k < dim; ++k) {
      double v = 0.5 * noise[static_cast<std::size_t>(k)];
      if (e >= 0) v += class_dir[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)];
      out << ' ' << v;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace emo::datagen
