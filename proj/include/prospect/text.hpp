#pragma once

#include <string>
#include <string_view>
#include <vector>

// Byte-level text helpers shared by the segmenter, the embedder and the
// vectorizer. Case folding is ASCII only; multi-byte UTF-8 passes through.
namespace prospect::text {

std::string to_lower(std::string_view s);

/// Splits on ASCII whitespace; never returns empty pieces.
std::vector<std::string_view> split_whitespace(std::string_view s);

std::string_view trim(std::string_view s);

/// True for ASCII punctuation and for a fixed set of Unicode punctuation
/// code points (curly quotes, dashes, ellipsis, inverted marks, guillemets).
bool is_punctuation(char32_t cp);

/// Removes punctuation code points from both ends of `token`.
std::string_view strip_edge_punctuation(std::string_view token);

/// Lowercase, whitespace split, edge punctuation stripped, empty tokens dropped.
std::vector<std::string> tokenize(std::string_view s);

/// True when `s` contains an ASCII control character (C0 range or DEL).
bool has_control_chars(std::string_view s);

}  // namespace prospect::text
