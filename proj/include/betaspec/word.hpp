#pragma once

#include "betaspec/errors.hpp"

#include <algorithm>
#include <charconv>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace betaspec {

/// A finite digit sequence. Whether it is admissible depends on the base it
/// is read against, so the base is passed alongside rather than stored.
using Word = std::vector<int>;

enum class LexOrder { less, equal, greater };

/// Lexicographic comparison; the shorter sequence is padded with zeros.
inline LexOrder compare_lex(std::span<const int> a, std::span<const int> b) {
  const std::size_t len = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < len; ++i) {
    const int x = i < a.size() ? a[i] : 0;
    const int y = i < b.size() ? b[i] : 0;
    if (x < y) return LexOrder::less;
    if (x > y) return LexOrder::greater;
  }
  return LexOrder::equal;
}

inline std::string format_word(std::span<const int> w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(w[i]);
  }
  return out;
}

/// Parses "1,0,1". An empty string is the empty word.
inline Word parse_word(std::string_view text) {
  Word w;
  if (text.empty()) return w;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string_view field = text.substr(pos, comma - pos);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    int digit = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), digit);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || digit < 0)
      throw input_error("malformed digit word: '" + std::string(text) + "'");
    w.push_back(digit);
    pos = comma + 1;
  }
  return w;
}

inline Word concat(std::span<const int> a, std::span<const int> b) {
  Word out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline Word zeros(std::size_t n) { return Word(n, 0); }

}  // namespace betaspec
