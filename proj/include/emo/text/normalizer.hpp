#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace emo::text {

inline constexpr std::string_view kPad = "<pad>";
inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kNum = "<num>";
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kDefaultMaxLen = 64;

using TokenSequence = std::vector<std::string>;

/// Lowercases, strips everything but letters, digits and intra-word
/// apostrophes, splits on whitespace, and replaces numeric tokens by `<num>`.
TokenSequence normalize(std::string_view utf8);

std::string join(const TokenSequence& tokens);

/// Word -> index table. Ids 0 and 1 are always `<pad>` and `<unk>`.
/// Frequencies drive the spelling-correction tie-break.
class Vocabulary {
 public:
  Vocabulary();

  /// Builds from explicit ids; `<pad>`/`<unk>` are forced to 0/1.
  static Vocabulary from_ids(const std::map<std::string, int>& ids,
                             const std::map<std::string, std::int64_t>& freq = {});

  /// Adds `word` with the next free id unless already present.
  int add(const std::string& word, std::int64_t freq = 0);

  bool contains(std::string_view word) const;
  int id(std::string_view word) const;  // -1 when absent
  std::int64_t frequency(std::string_view word) const;
  /// Size of the id space (max id + 1).
  std::size_t size() const noexcept { return size_; }
  const std::vector<std::string>& words() const noexcept { return words_; }

 private:
  std::unordered_map<std::string, int> ids_;
  std::unordered_map<std::string, std::int64_t> freq_;
  std::vector<std::string> words_;  // non-sentinel words, insertion order
  std::size_t size_ = 2;
};

/// Restricted Damerau-Levenshtein (optimal string alignment) over code points.
int edit_distance(std::string_view a, std::string_view b);

/// In-vocabulary tokens pass through; otherwise the nearest vocabulary word
/// within distance 2 (ties: higher frequency, then lexicographic), else `<unk>`.
std::string correct_spelling(const std::string& token, const Vocabulary& vocab);

struct EncodedText {
  std::vector<int> ids;
  int length = 0;
  int max_len() const noexcept { return static_cast<int>(ids.size()); }
};

EncodedText encode(const TokenSequence& tokens, const Vocabulary& vocab,
                   int max_len = kDefaultMaxLen);

}  // namespace emo::text
