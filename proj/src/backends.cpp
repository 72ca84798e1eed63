#include "m3pipe/backends.hpp"

#include <algorithm>

#include "m3pipe/errors.hpp"
#include "m3pipe/hash.hpp"

namespace m3pipe {

std::string_view to_string(EmbedKind kind) { return kind == EmbedKind::text ? "text" : "image"; }

EmbedKind parse_embed_kind(std::string_view kind) {
  if (kind == "text") return EmbedKind::text;
  if (kind == "image") return EmbedKind::image;
  throw ValidationError("unknown embedding kind '" + std::string(kind) + "'");
}

namespace {

int pair_rotation(Lang a, Lang b) {
  std::string lo(to_string(a)), hi(to_string(b));
  if (lo > hi) std::swap(lo, hi);
  return 1 + static_cast<int>(fnv1a64(lo + "|" + hi) % 7);
}

std::string rotate_letters(const std::string& text, int k) {
  // k may be negative; only ASCII letters move, so the transform is safe on
  // UTF-8 byte sequences.
  std::string out = text;
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') {
      c = static_cast<char>('a' + ((c - 'a' + k) % 26 + 26) % 26);
    } else if (c >= 'A' && c <= 'Z') {
      c = static_cast<char>('A' + ((c - 'A' + k) % 26 + 26) % 26);
    }
  }
  return out;
}

}  // namespace

std::string mock_translate_text(const std::string& text, Lang src, Lang tgt) {
  if (src == tgt) {
    throw ValidationError("mock translation requires src != tgt (both '" +
                          std::string(to_string(src)) + "')");
  }
  int k = pair_rotation(src, tgt);
  bool forward = to_string(src) < to_string(tgt);
  return rotate_letters(text, forward ? k : -k);
}

std::vector<double> mock_embed_vector(const std::string& item, EmbedKind kind) {
  std::string seed_input(to_string(kind));
  seed_input.push_back('\x1f');
  seed_input += item;
  SplitMix64 rng(fnv1a64(seed_input));
  std::vector<double> v(EmbeddingBackend::kMockDim);
  for (double& x : v) x = rng.next_unit() * 2.0 - 1.0;
  return v;
}

std::vector<std::string> MockTranslationBackend::translate(const std::vector<std::string>& texts,
                                                           Lang src, Lang tgt) {
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(mock_translate_text(t, src, tgt));
  return out;
}

std::vector<std::string> UppercaseTranslationBackend::translate(
    const std::vector<std::string>& texts, Lang src, Lang tgt) {
  if (src == tgt) throw ValidationError("src == tgt");
  std::vector<std::string> out = texts;
  for (auto& t : out) {
    for (char& c : t) {
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
  }
  return out;
}

std::vector<std::string> LetterMangleTranslationBackend::translate(
    const std::vector<std::string>& texts, Lang src, Lang tgt) {
  if (src == tgt) throw ValidationError("src == tgt");
  std::vector<std::string> out = texts;
  for (auto& t : out) {
    for (char& c : t) {
      if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) c = 'Z';
    }
  }
  return out;
}

std::vector<std::string> LossyTranslationBackend::translate(const std::vector<std::string>& texts,
                                                            Lang src, Lang tgt) {
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    std::string translated = mock_translate_text(t, src, tgt);
    std::size_t end = translated.find_last_not_of(" \t\n");
    if (end == std::string::npos) {
      out.push_back(translated);
      continue;
    }
    std::size_t cut = translated.find_last_of(" \t\n", end);
    out.push_back(cut == std::string::npos ? std::string() : translated.substr(0, cut));
  }
  return out;
}

std::string MockGenerationBackend::generate(const std::string& prompt,
                                            const std::vector<std::string>&, int max_tokens) {
  if (max_tokens < 1) throw ValidationError("max_tokens must be >= 1");
  char letter = static_cast<char>('A' + fnv1a64(prompt) % 4);
  return std::string("The answer is ") + letter + ".";
}

std::vector<std::vector<double>> MockEmbeddingBackend::embed(const std::vector<std::string>& items,
                                                             EmbedKind kind) {
  std::vector<std::vector<double>> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(mock_embed_vector(item, kind));
  return out;
}

}  // namespace m3pipe
