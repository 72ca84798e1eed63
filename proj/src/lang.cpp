#include "m3pipe/lang.hpp"

#include "m3pipe/errors.hpp"

namespace m3pipe {

namespace {
constexpr std::array<std::string_view, 11> kCodes = {
    "en", "zh", "hi", "es", "fr", "ar", "bn", "ru", "ur", "ja", "ko"};
}

std::vector<Lang> target_langs() {
  std::vector<Lang> out;
  for (Lang lang : kAllLangs) {
    if (lang != Lang::en) out.push_back(lang);
  }
  return out;
}

std::string_view to_string(Lang lang) { return kCodes[static_cast<int>(lang)]; }

Lang parse_lang(std::string_view code) {
  for (std::size_t i = 0; i < kCodes.size(); ++i) {
    if (kCodes[i] == code) return static_cast<Lang>(i);
  }
  throw ValidationError("unknown language code '" + std::string(code) +
                        "' (valid: en zh hi es fr ar bn ru ur ja ko)");
}

bool is_valid_lang(std::string_view code) {
  for (auto c : kCodes) {
    if (c == code) return true;
  }
  return false;
}

}  // namespace m3pipe
