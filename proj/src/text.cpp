#include "prospect/text.hpp"

#include <algorithm>

namespace prospect::text {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

struct Decoded {
  char32_t cp;
  std::size_t length;
};

// Decodes the code point starting at `pos`. Invalid sequences decode as a
// single byte so that stripping never splits a valid character.
Decoded decode_at(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
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
    return {0xFFFD, 1};
  }
  if (pos + len > s.size()) return {0xFFFD, 1};
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

// Start offset of the code point that ends right before `end`.
std::size_t last_code_point_start(std::string_view s, std::size_t end) {
  std::size_t pos = end - 1;
  std::size_t steps = 0;
  while (pos > 0 && steps < 3 && (static_cast<unsigned char>(s[pos]) & 0xC0) == 0x80) {
    --pos;
    ++steps;
  }
  const auto d = decode_at(s, pos);
  if (pos + d.length != end) return end - 1;
  return pos;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  });
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

bool is_punctuation(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0x00A1:  // inverted exclamation
    case 0x00AB:  // guillemets
    case 0x00BB:
    case 0x00BF:  // inverted question
    case 0x2010:
    case 0x2011:
    case 0x2012:
    case 0x2013:
    case 0x2014:
    case 0x2015:
    case 0x2018:
    case 0x2019:
    case 0x201A:
    case 0x201B:
    case 0x201C:
    case 0x201D:
    case 0x201E:
    case 0x201F:
    case 0x2026:  // ellipsis
    case 0x2039:
    case 0x203A:
    case 0x3001:
    case 0x3002:
    case 0xFF01:
    case 0xFF0C:
    case 0xFF1F:
      return true;
    default:
      return false;
  }
}

std::string_view strip_edge_punctuation(std::string_view token) {
  std::size_t b = 0;
  std::size_t e = token.size();
  while (b < e) {
    const auto d = decode_at(token, b);
    if (!is_punctuation(d.cp)) break;
    b += d.length;
  }
  while (e > b) {
    const std::size_t start = last_code_point_start(token, e);
    if (!is_punctuation(decode_at(token, start).cp)) break;
    e = start;
  }
  return token.substr(b, e - b);
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  for (auto piece : split_whitespace(s)) {
    auto stripped = strip_edge_punctuation(piece);
    if (!stripped.empty()) out.push_back(to_lower(stripped));
  }
  return out;
}

bool has_control_chars(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x20 || u == 0x7F;
  });
}

}  // namespace prospect::text
