#include "emo/text/normalizer.hpp"

#include <locale.h>
#include <wctype.h>

#include <algorithm>
#include <tuple>

namespace emo::text {
namespace {

// Decodes one UTF-8 sequence; malformed input yields U+FFFD and advances one byte.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    const int c = cont(static_cast<std::size_t>(k));
    if (c < 0) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  i += static_cast<std::size_t>(len);
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0xFFFD;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) out.push_back(next_code_point(s, i));
  return out;
}

// Unicode classification via glibc's built-in C.UTF-8 tables.
locale_t utf8_locale() {
  static locale_t loc = [] {
    locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(nullptr));
    if (l == static_cast<locale_t>(nullptr)) {
      l = newlocale(LC_CTYPE_MASK, "en_US.UTF-8", static_cast<locale_t>(nullptr));
    }
    return l;
  }();
  return loc;
}

bool is_ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

bool is_word_char(char32_t c) {
  if (c < 0x80) return std::isalnum(static_cast<int>(c)) != 0;
  const locale_t loc = utf8_locale();
  if (loc == static_cast<locale_t>(nullptr)) return false;
  return iswalnum_l(static_cast<wint_t>(c), loc) != 0;
}

char32_t to_lower(char32_t c) {
  if (c < 0x80) return static_cast<char32_t>(std::tolower(static_cast<int>(c)));
  const locale_t loc = utf8_locale();
  if (loc == static_cast<locale_t>(nullptr)) return c;
  const auto lower = static_cast<char32_t>(towlower_l(static_cast<wint_t>(c), loc));
  // A lowered code point must itself classify as a word character.
  return is_word_char(lower) ? lower : c;
}

bool is_apostrophe(char32_t c) { return c == U'\'' || c == U'’'; }

bool is_space(char32_t c) {
  if (c < 0x80) return std::isspace(static_cast<int>(c)) != 0;
  const locale_t loc = utf8_locale();
  return loc != static_cast<locale_t>(nullptr) && iswspace_l(static_cast<wint_t>(c), loc) != 0;
}

bool is_numeric(const std::u32string& tok) {
  int dots = 0;
  int digits = 0;
  for (char32_t c : tok) {
    if (c == U'.') {
      ++dots;
    } else if (is_ascii_digit(c)) {
      ++digits;
    } else {
      return false;
    }
  }
  return digits > 0 && dots <= 1 && tok.front() != U'.' && tok.back() != U'.';
}

void emit_piece(std::u32string piece, TokenSequence& out) {
  const auto first = piece.find_first_not_of(U'\'');
  if (first == std::u32string::npos) return;
  const auto last = piece.find_last_not_of(U'\'');
  piece = piece.substr(first, last - first + 1);
  if (is_numeric(piece)) {
    out.emplace_back(kNum);
    return;
  }
  std::string utf8;
  for (char32_t c : piece) append_utf8(utf8, c);
  out.push_back(std::move(utf8));
}

void emit_token(const std::u32string& tok, TokenSequence& out) {
  if (tok.empty()) return;
  if (is_numeric(tok)) {
    out.emplace_back(kNum);
    return;
  }
  // A decimal point only survives inside a purely numeric token.
  std::u32string piece;
  for (char32_t c : tok) {
    if (c == U'.') {
      emit_piece(std::move(piece), out);
      piece.clear();
    } else {
      piece.push_back(c);
    }
  }
  emit_piece(std::move(piece), out);
}

void normalize_chunk(const std::u32string& chunk, TokenSequence& out) {
  std::u32string tok;
  for (std::size_t i = 0; i < chunk.size(); ++i) {
    const char32_t c = chunk[i];
    if (is_word_char(c)) {
      tok.push_back(to_lower(c));
    } else if (is_apostrophe(c)) {
      tok.push_back(U'\'');
    } else if (c == U'.' && !tok.empty() && is_ascii_digit(tok.back()) &&
               i + 1 < chunk.size() && is_ascii_digit(chunk[i + 1])) {
      tok.push_back(U'.');
    } else {
      emit_token(tok, out);
      tok.clear();
    }
  }
  emit_token(tok, out);
}

}  // namespace

TokenSequence normalize(std::string_view utf8) {
  TokenSequence out;
  const std::u32string cps = decode(utf8);
  std::u32string chunk;
  auto flush = [&] {
    if (chunk.empty()) return;
    if (chunk == U"<num>") {
      out.emplace_back(kNum);
    } else {
      normalize_chunk(chunk, out);
    }
    chunk.clear();
  };
  for (char32_t c : cps) {
    if (is_space(c)) {
      flush();
    } else {
      chunk.push_back(c);
    }
  }
  flush();
  return out;
}

std::string join(const TokenSequence& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Vocabulary::Vocabulary() {
  ids_.emplace(std::string(kPad), kPadId);
  ids_.emplace(std::string(kUnk), kUnkId);
}

Vocabulary Vocabulary::from_ids(const std::map<std::string, int>& ids,
                                const std::map<std::string, std::int64_t>& freq) {
  Vocabulary v;
  std::vector<std::pair<int, std::string>> by_id;
  for (const auto& [word, id] : ids)
    if (word != kPad && word != kUnk) by_id.emplace_back(id, word);
  std::sort(by_id.begin(), by_id.end());
  for (auto& [id, word] : by_id) {
    v.ids_[word] = id;
    v.words_.push_back(std::move(word));
    v.size_ = std::max(v.size_, static_cast<std::size_t>(id) + 1);
  }
  for (const auto& [word, f] : freq) v.freq_[word] = f;
  return v;
}

int Vocabulary::add(const std::string& word, std::int64_t freq) {
  if (auto it = ids_.find(word); it != ids_.end()) return it->second;
  const int id = static_cast<int>(size_);
  ids_.emplace(word, id);
  freq_[word] = freq;
  words_.push_back(word);
  ++size_;
  return id;
}

bool Vocabulary::contains(std::string_view word) const {
  return ids_.find(std::string(word)) != ids_.end();
}

int Vocabulary::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? -1 : it->second;
}

std::int64_t Vocabulary::frequency(std::string_view word) const {
  auto it = freq_.find(std::string(word));
  return it == freq_.end() ? 0 : it->second;
}

int edit_distance(std::string_view a_utf8, std::string_view b_utf8) {
  const std::u32string a = decode(a_utf8);
  const std::u32string b = decode(b_utf8);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<int> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      int v = std::min({at(i - 1, j) + 1, at(i, j - 1) + 1, at(i - 1, j - 1) + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        v = std::min(v, at(i - 2, j - 2) + 1);
      }
      at(i, j) = v;
    }
  }
  return at(n, m);
}

std::string correct_spelling(const std::string& token, const Vocabulary& vocab) {
  if (vocab.contains(token)) return token;
  if (token == kNum) return std::string(kUnk);
  constexpr int kMaxDistance = 2;
  const std::size_t len = decode(token).size();
  const std::string* best = nullptr;
  int best_dist = kMaxDistance + 1;
  std::int64_t best_freq = 0;
  for (const auto& word : vocab.words()) {
    const std::size_t wlen = decode(word).size();
    const std::size_t diff = wlen > len ? wlen - len : len - wlen;
    if (diff > static_cast<std::size_t>(kMaxDistance)) continue;
    const int dist = edit_distance(token, word);
    if (dist > kMaxDistance) continue;
    const std::int64_t freq = vocab.frequency(word);
    if (best == nullptr || std::tie(dist, best_freq) < std::tie(best_dist, freq) ||
        (dist == best_dist && freq == best_freq && word < *best)) {
      best = &word;
      best_dist = dist;
      best_freq = freq;
    }
  }
  return best ? *best : std::string(kUnk);
}

EncodedText encode(const TokenSequence& tokens, const Vocabulary& vocab, int max_len) {
  EncodedText enc;
  enc.ids.assign(static_cast<std::size_t>(std::max(max_len, 1)), kPadId);
  const std::size_t n = std::min(tokens.size(), enc.ids.size());
  for (std::size_t i = 0; i < n; ++i) {
    const int id = vocab.id(correct_spelling(tokens[i], vocab));
    enc.ids[i] = id < 0 ? kUnkId : id;
  }
  enc.length = static_cast<int>(n);
  return enc;
}

}  // namespace emo::text
