#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "m3pipe/backends.hpp"

namespace httplib {
class Server;
}

namespace m3pipe {

struct RetryPolicy {
  int retries = 3;  // total attempts
  int backoff_base_ms = 500;
  double backoff_factor = 2.0;
  int batch_cap = 64;  // max texts/items per request
  std::string auth_token;
};

// Wire protocol: HTTP POST with JSON bodies.
//   /translate {src, tgt, texts[]}            -> {translations[]}
//   /embed     {kind, items[]}                -> {vectors[[]]}
//   /generate  {prompt, image_refs[], max_tokens} -> {text}
// Responses are validated against the length/shape invariants before they are
// returned; violations raise ProtocolError naming the field. Transport-level
// failures (connect errors, 5xx, 429) are retried with exponential backoff up
// to policy.retries attempts, then raise TransportError.
class HttpTranslationBackend : public TranslationBackend {
 public:
  HttpTranslationBackend(std::string base_url, RetryPolicy policy = {});
  std::vector<std::string> translate(const std::vector<std::string>& texts, Lang src,
                                     Lang tgt) override;
  std::string describe() const override { return base_url_; }
  int last_attempts() const { return last_attempts_.load(); }

 private:
  std::string base_url_;
  RetryPolicy policy_;
  std::atomic<int> last_attempts_{0};
};

class HttpEmbeddingBackend : public EmbeddingBackend {
 public:
  HttpEmbeddingBackend(std::string base_url, RetryPolicy policy = {});
  std::vector<std::vector<double>> embed(const std::vector<std::string>& items,
                                         EmbedKind kind) override;
  std::string describe() const override { return base_url_; }

 private:
  std::string base_url_;
  RetryPolicy policy_;
};

class HttpGenerationBackend : public GenerationBackend {
 public:
  HttpGenerationBackend(std::string base_url, RetryPolicy policy = {});
  std::string generate(const std::string& prompt, const std::vector<std::string>& image_refs,
                       int max_tokens) override;
  std::string describe() const override { return base_url_; }

 private:
  std::string base_url_;
  RetryPolicy policy_;
};

// Factories: "mock:..." names an in-process deterministic backend,
// "http://host:port" a remote one. Unknown schemes raise ValidationError.
std::shared_ptr<TranslationBackend> make_translation_backend(const std::string& url,
                                                             const RetryPolicy& policy = {});
std::shared_ptr<EmbeddingBackend> make_embedding_backend(const std::string& url,
                                                         const RetryPolicy& policy = {});
std::shared_ptr<GenerationBackend> make_generation_backend(const std::string& url,
                                                           const RetryPolicy& policy = {});

// Registers /translate, /embed, /generate, /healthz on an existing server;
// the caller owns the listen/stop lifecycle.
void register_backend_routes(httplib::Server& server, TranslationBackend& translation,
                             EmbeddingBackend& embedding, GenerationBackend& generation);

// Serves the three backends over the wire protocol above. Blocks until the
// process exits. port 0 binds an ephemeral port.
int serve_backends(const std::string& host, int port, TranslationBackend& translation,
                   EmbeddingBackend& embedding, GenerationBackend& generation);

}  // namespace m3pipe
