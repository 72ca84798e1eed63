#pragma once

#include <string>
#include <utility>
#include <vector>

namespace m3pipe {

// Sentinels are "⟦PH0⟧", "⟦PH1⟧", ... assigned left to right. Restoration
// keys on the bracket/digit skeleton ⟦<letters><digits>⟧, so sentinels
// survive backends that rewrite ASCII letters: the brackets are non-ASCII
// codepoints and the index digits are never letters.
struct PlaceholderMap {
  std::vector<std::pair<std::string, std::string>> entries;  // (sentinel, original)

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

inline constexpr const char* kSentinelPrefix = "\xE2\x9F\xA6PH";  // "⟦PH"

std::string make_sentinel(std::size_t index);

// Patterns are literals, optionally containing '*' which matches the
// shortest span of any characters. At each position the longest match among
// all patterns wins. Throws ValidationError when the text already contains
// the sentinel prefix or a pattern has no literal character.
std::pair<std::string, PlaceholderMap> protect(const std::string& text,
                                               const std::vector<std::string>& patterns);

// Replaces every sentinel skeleton with its original, requiring each map
// entry to be consumed exactly once. Throws ValidationError when a sentinel
// was lost, duplicated, or invented by the backend.
std::string restore(const std::string& masked, const PlaceholderMap& map);

// Default image-slot tokens of instruction-tuning corpora, plus a wildcard
// protecting any pre-bracketed token.
const std::vector<std::string>& default_placeholder_patterns();

}  // namespace m3pipe
