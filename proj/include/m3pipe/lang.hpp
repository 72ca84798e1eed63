#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace m3pipe {

// The 11 languages of the corpus: English plus the 10 translation targets.
enum class Lang { en, zh, hi, es, fr, ar, bn, ru, ur, ja, ko };

inline constexpr std::array<Lang, 11> kAllLangs = {
    Lang::en, Lang::zh, Lang::hi, Lang::es, Lang::fr, Lang::ar,
    Lang::bn, Lang::ru, Lang::ur, Lang::ja, Lang::ko};

// The 10 non-English targets, in canonical order.
std::vector<Lang> target_langs();

std::string_view to_string(Lang lang);

// Throws ValidationError for anything outside the 11 valid codes.
Lang parse_lang(std::string_view code);

bool is_valid_lang(std::string_view code);

}  // namespace m3pipe
