#include "m3pipe/http_backend.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "m3pipe/errors.hpp"

namespace m3pipe {

using nlohmann::json;

namespace {

bool transient_status(int status) {
  return status == 429 || status == 500 || status == 502 || status == 503 || status == 504;
}

// One POST with retry/backoff. Each attempt uses a fresh connection so the
// adapter stays safe under concurrent callers.
json post_json(const std::string& base_url, const std::string& path, const json& body,
               const RetryPolicy& policy, int* attempts_out) {
  std::string payload = body.dump();
  std::string last_error;
  int attempts = std::max(1, policy.retries);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) {
      double delay = policy.backoff_base_ms * std::pow(policy.backoff_factor, attempt - 2);
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(delay)));
    }
    httplib::Client client(base_url);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!policy.auth_token.empty()) {
      headers.emplace("Authorization", "Bearer " + policy.auth_token);
    }
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "connection failed (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status == 200) {
      if (attempts_out != nullptr) *attempts_out = attempt;
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        throw ProtocolError("backend " + base_url + path + " returned unparseable body: " +
                            e.what());
      }
    }
    if (transient_status(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    throw ProtocolError("backend " + base_url + path + " returned HTTP " +
                        std::to_string(res->status) + ": " + res->body);
  }
  throw TransportError("backend " + base_url + path + " unreachable after " +
                       std::to_string(attempts) + " attempts: " + last_error);
}

std::vector<std::vector<std::string>> split_batches(const std::vector<std::string>& items,
                                                    int cap) {
  std::vector<std::vector<std::string>> batches;
  std::size_t step = cap < 1 ? 1 : static_cast<std::size_t>(cap);
  for (std::size_t i = 0; i < items.size(); i += step) {
    batches.emplace_back(items.begin() + i,
                         items.begin() + std::min(items.size(), i + step));
  }
  return batches;
}

}  // namespace

HttpTranslationBackend::HttpTranslationBackend(std::string base_url, RetryPolicy policy)
    : base_url_(std::move(base_url)), policy_(std::move(policy)) {}

std::vector<std::string> HttpTranslationBackend::translate(const std::vector<std::string>& texts,
                                                           Lang src, Lang tgt) {
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& batch : split_batches(texts, policy_.batch_cap)) {
    json body{{"src", std::string(to_string(src))},
              {"tgt", std::string(to_string(tgt))},
              {"texts", batch}};
    int attempts = 0;
    json reply = post_json(base_url_, "/translate", body, policy_, &attempts);
    last_attempts_.store(attempts);
    auto it = reply.find("translations");
    if (it == reply.end() || !it->is_array()) {
      throw ProtocolError("translate response is missing field 'translations'");
    }
    if (it->size() != batch.size()) {
      throw ProtocolError("field 'translations' has " + std::to_string(it->size()) +
                          " entries for " + std::to_string(batch.size()) + " texts");
    }
    for (const json& t : *it) {
      if (!t.is_string()) throw ProtocolError("field 'translations' holds a non-string entry");
      out.push_back(t.get<std::string>());
    }
  }
  return out;
}

HttpEmbeddingBackend::HttpEmbeddingBackend(std::string base_url, RetryPolicy policy)
    : base_url_(std::move(base_url)), policy_(std::move(policy)) {}

std::vector<std::vector<double>> HttpEmbeddingBackend::embed(const std::vector<std::string>& items,
                                                             EmbedKind kind) {
  std::vector<std::vector<double>> out;
  out.reserve(items.size());
  std::size_t dim = 0;
  for (const auto& batch : split_batches(items, policy_.batch_cap)) {
    json body{{"kind", std::string(to_string(kind))}, {"items", batch}};
    json reply = post_json(base_url_, "/embed", body, policy_, nullptr);
    auto it = reply.find("vectors");
    if (it == reply.end() || !it->is_array()) {
      throw ProtocolError("embed response is missing field 'vectors'");
    }
    if (it->size() != batch.size()) {
      throw ProtocolError("field 'vectors' has " + std::to_string(it->size()) +
                          " entries for " + std::to_string(batch.size()) + " items");
    }
    for (const json& v : *it) {
      if (!v.is_array() || v.empty()) {
        throw ProtocolError("field 'vectors' holds an empty or non-array vector");
      }
      if (dim == 0) dim = v.size();
      if (v.size() != dim) {
        throw ProtocolError("field 'vectors' mixes dimensions " + std::to_string(dim) + " and " +
                            std::to_string(v.size()));
      }
      out.push_back(v.get<std::vector<double>>());
    }
  }
  return out;
}

HttpGenerationBackend::HttpGenerationBackend(std::string base_url, RetryPolicy policy)
    : base_url_(std::move(base_url)), policy_(std::move(policy)) {}

std::string HttpGenerationBackend::generate(const std::string& prompt,
                                            const std::vector<std::string>& image_refs,
                                            int max_tokens) {
  if (max_tokens < 1) throw ValidationError("max_tokens must be >= 1");
  json body{{"prompt", prompt}, {"image_refs", image_refs}, {"max_tokens", max_tokens}};
  json reply = post_json(base_url_, "/generate", body, policy_, nullptr);
  auto it = reply.find("text");
  if (it == reply.end() || !it->is_string()) {
    throw ProtocolError("generate response is missing string field 'text'");
  }
  return it->get<std::string>();
}

namespace {

bool is_http_url(const std::string& url) {
  return url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0;
}

}  // namespace

std::shared_ptr<TranslationBackend> make_translation_backend(const std::string& url,
                                                             const RetryPolicy& policy) {
  if (url == "mock:" || url == "mock:translate") return std::make_shared<MockTranslationBackend>();
  if (url == "mock:uppercase") return std::make_shared<UppercaseTranslationBackend>();
  if (url == "mock:mangle") return std::make_shared<LetterMangleTranslationBackend>();
  if (url == "mock:lossy") return std::make_shared<LossyTranslationBackend>();
  if (url == "mock:echo") return std::make_shared<EchoTranslationBackend>();
  if (is_http_url(url)) return std::make_shared<HttpTranslationBackend>(url, policy);
  throw ValidationError("unsupported translation backend URL '" + url + "'");
}

std::shared_ptr<EmbeddingBackend> make_embedding_backend(const std::string& url,
                                                         const RetryPolicy& policy) {
  if (url == "mock:" || url == "mock:embed") return std::make_shared<MockEmbeddingBackend>();
  if (is_http_url(url)) return std::make_shared<HttpEmbeddingBackend>(url, policy);
  throw ValidationError("unsupported embedding backend URL '" + url + "'");
}

std::shared_ptr<GenerationBackend> make_generation_backend(const std::string& url,
                                                           const RetryPolicy& policy) {
  if (url == "mock:" || url == "mock:generate") return std::make_shared<MockGenerationBackend>();
  if (is_http_url(url)) return std::make_shared<HttpGenerationBackend>(url, policy);
  throw ValidationError("unsupported generation backend URL '" + url + "'");
}

void register_backend_routes(httplib::Server& server, TranslationBackend& translation,
                             EmbeddingBackend& embedding, GenerationBackend& generation) {
  auto handle = [](const httplib::Request& req, httplib::Response& res,
                   const std::function<json(const json&)>& fn) {
    try {
      json reply = fn(json::parse(req.body));
      res.set_content(reply.dump(), "application/json");
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    } catch (const ValidationError& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  };

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });
  server.Post("/translate", [&](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [&](const json& body) {
      Lang src = parse_lang(body.at("src").get<std::string>());
      Lang tgt = parse_lang(body.at("tgt").get<std::string>());
      auto texts = body.at("texts").get<std::vector<std::string>>();
      return json{{"translations", translation.translate(texts, src, tgt)}};
    });
  });
  server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [&](const json& body) {
      EmbedKind kind = parse_embed_kind(body.at("kind").get<std::string>());
      auto items = body.at("items").get<std::vector<std::string>>();
      return json{{"vectors", embedding.embed(items, kind)}};
    });
  });
  server.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [&](const json& body) {
      std::vector<std::string> refs;
      if (body.contains("image_refs")) refs = body["image_refs"].get<std::vector<std::string>>();
      return json{{"text", generation.generate(body.at("prompt").get<std::string>(), refs,
                                               body.value("max_tokens", 64))}};
    });
  });
}

int serve_backends(const std::string& host, int port, TranslationBackend& translation,
                   EmbeddingBackend& embedding, GenerationBackend& generation) {
  httplib::Server server;
  register_backend_routes(server, translation, embedding, generation);
  if (port == 0) {
    int bound = server.bind_to_any_port(host);
    if (bound < 0) throw TransportError("cannot bind mock server on " + host);
    server.listen_after_bind();
    return bound;
  }
  if (!server.listen(host, port)) {
    throw TransportError("cannot listen on " + host + ":" + std::to_string(port));
  }
  return port;
}

}  // namespace m3pipe
