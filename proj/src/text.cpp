#include "srm/core/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <tuple>

namespace srm {

namespace {

// Decodes one UTF-8 codepoint starting at `i`; advances `i` past it.
// Malformed bytes are passed through as single-byte codepoints.
uint32_t next_codepoint(std::string_view s, size_t& i) {
  const auto byte = [&](size_t k) { return static_cast<unsigned char>(s[k]); };
  unsigned char b0 = byte(i);
  size_t len = 1;
  uint32_t cp = b0;
  if ((b0 & 0x80u) == 0x00u) {
    len = 1;
    cp = b0;
  } else if ((b0 & 0xE0u) == 0xC0u && i + 1 < s.size()) {
    len = 2;
    cp = (b0 & 0x1Fu) << 6 | (byte(i + 1) & 0x3Fu);
  } else if ((b0 & 0xF0u) == 0xE0u && i + 2 < s.size()) {
    len = 3;
    cp = (b0 & 0x0Fu) << 12 | (byte(i + 1) & 0x3Fu) << 6 | (byte(i + 2) & 0x3Fu);
  } else if ((b0 & 0xF8u) == 0xF0u && i + 3 < s.size()) {
    len = 4;
    cp = (b0 & 0x07u) << 18 | (byte(i + 1) & 0x3Fu) << 12 |
         (byte(i + 2) & 0x3Fu) << 6 | (byte(i + 3) & 0x3Fu);
  }
  i += len;
  return cp;
}

bool is_unicode_space(uint32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_ascii_punct(unsigned char c) { return std::ispunct(c) != 0; }

std::string strip_edge_punct(const std::string& token) {
  size_t begin = 0;
  size_t end = token.size();
  while (begin < end && is_ascii_punct(static_cast<unsigned char>(token[begin]))) ++begin;
  while (end > begin && is_ascii_punct(static_cast<unsigned char>(token[end - 1]))) --end;
  return token.substr(begin, end - begin);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (current.empty()) return;
    std::string t = strip_edge_punct(current);
    if (!t.empty()) tokens.push_back(std::move(t));
    current.clear();
  };
  size_t i = 0;
  while (i < text.size()) {
    size_t start = i;
    uint32_t cp = next_codepoint(text, i);
    if (is_unicode_space(cp)) {
      flush();
      continue;
    }
    if (cp < 0x80) {
      current.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
    } else {
      current.append(text.substr(start, i - start));
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::string current;
  for (char c : text) {
    if (c == '.' || c == '!' || c == '?') {
      if (std::any_of(current.begin(), current.end(),
                      [](unsigned char ch) { return !std::isspace(ch); }))
        sentences.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (std::any_of(current.begin(), current.end(),
                  [](unsigned char ch) { return !std::isspace(ch); }))
    sentences.push_back(current);
  return sentences;
}

double distinct1(const std::vector<std::string>& tokens) {
  if (tokens.empty()) return 0.0;
  std::set<std::string> unique(tokens.begin(), tokens.end());
  return static_cast<double>(unique.size()) / static_cast<double>(tokens.size());
}

double distinct2(const std::vector<std::string>& tokens) {
  if (tokens.size() < 2) return 0.0;
  std::set<std::pair<std::string, std::string>> unique;
  for (size_t i = 0; i + 1 < tokens.size(); ++i) unique.emplace(tokens[i], tokens[i + 1]);
  return static_cast<double>(unique.size()) / static_cast<double>(tokens.size() - 1);
}

double repeated_trigram_fraction(const std::vector<std::string>& tokens) {
  if (tokens.size() < 3) return 0.0;
  std::map<std::tuple<std::string, std::string, std::string>, int> counts;
  for (size_t i = 0; i + 2 < tokens.size(); ++i)
    ++counts[{tokens[i], tokens[i + 1], tokens[i + 2]}];
  size_t total = tokens.size() - 2;
  size_t repeated = 0;
  for (size_t i = 0; i + 2 < tokens.size(); ++i)
    if (counts[{tokens[i], tokens[i + 1], tokens[i + 2]}] >= 2) ++repeated;
  return static_cast<double>(repeated) / static_cast<double>(total);
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end());
  std::set<std::string> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 0.0;
  size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::string to_lower_ascii(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  std::string h = to_lower_ascii(haystack);
  std::string n = to_lower_ascii(needle);
  return h.find(n) != std::string::npos;
}

}  // namespace srm
