#include "m3pipe/placeholder.hpp"

#include <optional>

#include "m3pipe/errors.hpp"

namespace m3pipe {

namespace {

constexpr const char* kOpen = "\xE2\x9F\xA6";   // ⟦
constexpr const char* kClose = "\xE2\x9F\xA7";  // ⟧
constexpr std::size_t kBracketLen = 3;

bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

// Length of the shortest match of `pattern` at text[pos], or nullopt.
// '*' spans the smallest run of characters that lets the rest match.
std::optional<std::size_t> match_at(const std::string& text, std::size_t pos,
                                    const std::string& pattern) {
  std::size_t cur = pos;
  std::size_t pi = 0;
  bool first_segment = true;
  while (pi < pattern.size()) {
    std::size_t star = pattern.find('*', pi);
    std::string_view segment(pattern.data() + pi, (star == std::string::npos ? pattern.size() : star) - pi);
    if (!segment.empty()) {
      if (first_segment) {
        if (text.compare(cur, segment.size(), segment) != 0) return std::nullopt;
        cur += segment.size();
      } else {
        std::size_t found = text.find(segment, cur);
        if (found == std::string::npos) return std::nullopt;
        cur = found + segment.size();
      }
    }
    first_segment = false;
    if (star == std::string::npos) break;
    pi = star + 1;
  }
  return cur - pos;
}

}  // namespace

std::string make_sentinel(std::size_t index) {
  return std::string(kOpen) + "PH" + std::to_string(index) + kClose;
}

const std::vector<std::string>& default_placeholder_patterns() {
  static const std::vector<std::string> kDefaults = {
      "<image>", "<Img>", "</Img>", "<ImageHere>", std::string(kOpen) + "*" + kClose};
  return kDefaults;
}

std::pair<std::string, PlaceholderMap> protect(const std::string& text,
                                               const std::vector<std::string>& patterns) {
  if (text.find(kSentinelPrefix) != std::string::npos) {
    throw ValidationError("text already contains the sentinel prefix ⟦PH");
  }
  for (const std::string& p : patterns) {
    if (p.find_first_not_of('*') == std::string::npos) {
      throw ValidationError("placeholder pattern must contain a literal character: '" + p + "'");
    }
  }
  std::string masked;
  masked.reserve(text.size());
  PlaceholderMap map;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t best = 0;
    for (const std::string& p : patterns) {
      if (auto len = match_at(text, i, p); len && *len > best) best = *len;
    }
    if (best > 0) {
      std::string sentinel = make_sentinel(map.size());
      map.entries.emplace_back(sentinel, text.substr(i, best));
      masked += sentinel;
      i += best;
    } else {
      masked.push_back(text[i]);
      ++i;
    }
  }
  return {std::move(masked), std::move(map)};
}

std::string restore(const std::string& masked, const PlaceholderMap& map) {
  std::string out;
  out.reserve(masked.size());
  std::vector<bool> used(map.size(), false);
  std::size_t i = 0;
  while (i < masked.size()) {
    if (masked.compare(i, kBracketLen, kOpen) != 0) {
      out.push_back(masked[i]);
      ++i;
      continue;
    }
    // Candidate skeleton: ⟦ letters* digits+ ⟧
    std::size_t j = i + kBracketLen;
    while (j < masked.size() && is_ascii_letter(masked[j])) ++j;
    std::size_t digits_begin = j;
    while (j < masked.size() && is_ascii_digit(masked[j])) ++j;
    bool closed = j > digits_begin && masked.compare(j, kBracketLen, kClose) == 0;
    if (!closed) {
      out.append(masked, i, kBracketLen);
      i += kBracketLen;
      continue;
    }
    std::size_t index = 0;
    try {
      index = std::stoul(masked.substr(digits_begin, j - digits_begin));
    } catch (const std::exception&) {
      throw ValidationError("placeholder index overflow in '" +
                            masked.substr(i, j + kBracketLen - i) + "'");
    }
    if (index >= map.size()) {
      throw ValidationError("backend produced unknown placeholder index " +
                            std::to_string(index));
    }
    if (used[index]) {
      throw ValidationError("backend duplicated placeholder index " + std::to_string(index));
    }
    used[index] = true;
    out += map.entries[index].second;
    i = j + kBracketLen;
  }
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (!used[k]) {
      throw ValidationError("backend dropped placeholder " + map.entries[k].first);
    }
  }
  return out;
}

}  // namespace m3pipe
