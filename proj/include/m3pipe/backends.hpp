#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "m3pipe/lang.hpp"

namespace m3pipe {

// Adapters for the three external model services. All are stateless and
// callable from multiple workers concurrently; order and length of batches
// are always preserved.

class TranslationBackend {
 public:
  virtual ~TranslationBackend() = default;
  virtual std::vector<std::string> translate(const std::vector<std::string>& texts, Lang src,
                                             Lang tgt) = 0;
  virtual std::string describe() const = 0;
};

enum class EmbedKind { text, image };

std::string_view to_string(EmbedKind kind);
EmbedKind parse_embed_kind(std::string_view kind);

class EmbeddingBackend {
 public:
  static constexpr std::size_t kMockDim = 16;

  virtual ~EmbeddingBackend() = default;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& items,
                                                 EmbedKind kind) = 0;
  virtual std::string describe() const = 0;
};

class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual std::string generate(const std::string& prompt,
                               const std::vector<std::string>& image_refs, int max_tokens) = 0;
  virtual std::string describe() const = 0;
};

// Deterministic reversible mock translation. Rule: with k = 1 +
// (fnv1a64(min(a,b) ++ "|" ++ max(a,b)) mod 7), rotate ASCII letters forward
// by k when a < b lexicographically, backward otherwise (a-z and A-Z wrap
// separately; every other codepoint passes through). Forward then backward
// is the exact identity. Throws ValidationError when src == tgt.
std::string mock_translate_text(const std::string& text, Lang src, Lang tgt);

// Deterministic 16-dim embedding: splitmix64 stream seeded with
// fnv1a64(kind ++ 0x1f ++ item), each coordinate drawn uniformly in [-1, 1).
std::vector<double> mock_embed_vector(const std::string& item, EmbedKind kind);

class MockTranslationBackend : public TranslationBackend {
 public:
  std::vector<std::string> translate(const std::vector<std::string>& texts, Lang src,
                                     Lang tgt) override;
  std::string describe() const override { return "mock:translate"; }
};

// Adversarial backend: uppercases every ASCII letter. Sentinels survive it
// unchanged (their letters are already uppercase), all other text is mangled
// irreversibly.
class UppercaseTranslationBackend : public TranslationBackend {
 public:
  std::vector<std::string> translate(const std::vector<std::string>& texts, Lang src,
                                     Lang tgt) override;
  std::string describe() const override { return "mock:uppercase"; }
};

// Adversarial backend: replaces every ASCII letter with 'Z'. Destroys all
// prose; placeholder sentinels keep their bracket/digit skeleton.
class LetterMangleTranslationBackend : public TranslationBackend {
 public:
  std::vector<std::string> translate(const std::vector<std::string>& texts, Lang src,
                                     Lang tgt) override;
  std::string describe() const override { return "mock:mangle"; }
};

// Lossy backend: mock-translates, then drops the final whitespace-delimited
// word of each text. Used to prove the QA metrics detect information loss.
class LossyTranslationBackend : public TranslationBackend {
 public:
  std::vector<std::string> translate(const std::vector<std::string>& texts, Lang src,
                                     Lang tgt) override;
  std::string describe() const override { return "mock:lossy"; }
};

class EchoTranslationBackend : public TranslationBackend {
 public:
  std::vector<std::string> translate(const std::vector<std::string>& texts, Lang,
                                     Lang) override {
    return texts;
  }
  std::string describe() const override { return "mock:echo"; }
};

// Wraps an arbitrary per-batch function; used by tests to script failures.
class ScriptedTranslationBackend : public TranslationBackend {
 public:
  using Fn = std::function<std::vector<std::string>(const std::vector<std::string>&, Lang, Lang)>;
  explicit ScriptedTranslationBackend(Fn fn, std::string name = "scripted:translate")
      : fn_(std::move(fn)), name_(std::move(name)) {}
  std::vector<std::string> translate(const std::vector<std::string>& texts, Lang src,
                                     Lang tgt) override {
    return fn_(texts, src, tgt);
  }
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

class MockEmbeddingBackend : public EmbeddingBackend {
 public:
  std::vector<std::vector<double>> embed(const std::vector<std::string>& items,
                                         EmbedKind kind) override;
  std::string describe() const override { return "mock:embed"; }
};

class ScriptedEmbeddingBackend : public EmbeddingBackend {
 public:
  using Fn = std::function<std::vector<double>(const std::string&, EmbedKind)>;
  explicit ScriptedEmbeddingBackend(Fn fn) : fn_(std::move(fn)) {}
  std::vector<std::vector<double>> embed(const std::vector<std::string>& items,
                                         EmbedKind kind) override {
    std::vector<std::vector<double>> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back(fn_(item, kind));
    return out;
  }
  std::string describe() const override { return "scripted:embed"; }

 private:
  Fn fn_;
};

// Deterministic pseudo-model: answers with a letter derived from the prompt
// hash (a four-way guesser). Exists so desk-scale eval runs need no server.
class MockGenerationBackend : public GenerationBackend {
 public:
  std::string generate(const std::string& prompt, const std::vector<std::string>& image_refs,
                       int max_tokens) override;
  std::string describe() const override { return "mock:generate"; }
};

class ScriptedGenerationBackend : public GenerationBackend {
 public:
  using Fn = std::function<std::string(const std::string&, const std::vector<std::string>&, int)>;
  explicit ScriptedGenerationBackend(Fn fn) : fn_(std::move(fn)) {}
  std::string generate(const std::string& prompt, const std::vector<std::string>& image_refs,
                       int max_tokens) override {
    return fn_(prompt, image_refs, max_tokens);
  }
  std::string describe() const override { return "scripted:generate"; }

 private:
  Fn fn_;
};

}  // namespace m3pipe
