#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "m3pipe/errors.hpp"
#include "m3pipe/http_backend.hpp"

using namespace m3pipe;
using nlohmann::json;

namespace {

// In-process HTTP server on an ephemeral port.
class TestServer {
 public:
  explicit TestServer(const std::function<void(httplib::Server&)>& setup) {
    setup(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~TestServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RetryPolicy fast_retries() {
  RetryPolicy policy;
  policy.retries = 3;
  policy.backoff_base_ms = 1;
  policy.backoff_factor = 2.0;
  return policy;
}

}  // namespace

TEST_CASE("healthy echo backend: response passthrough") {
  TestServer server([](httplib::Server& s) {
    s.Post("/translate", [](const httplib::Request& req, httplib::Response& res) {
      json body = json::parse(req.body);
      res.set_content(json{{"translations", body["texts"]}}.dump(), "application/json");
    });
  });
  HttpTranslationBackend backend(server.url(), fast_retries());
  std::vector<std::string> texts = {"uno", "dos", "tres"};
  CHECK(backend.translate(texts, Lang::en, Lang::es) == texts);
  CHECK(backend.last_attempts() == 1);
}

TEST_CASE("transient failure then success: attempt count = 2") {
  std::atomic<int> calls{0};
  TestServer server([&](httplib::Server& s) {
    s.Post("/translate", [&](const httplib::Request& req, httplib::Response& res) {
      if (calls.fetch_add(1) == 0) {
        res.status = 503;
        return;
      }
      json body = json::parse(req.body);
      res.set_content(json{{"translations", body["texts"]}}.dump(), "application/json");
    });
  });
  HttpTranslationBackend backend(server.url(), fast_retries());
  CHECK(backend.translate({"x"}, Lang::en, Lang::fr) == std::vector<std::string>{"x"});
  CHECK(backend.last_attempts() == 2);
  CHECK(calls.load() == 2);
}

TEST_CASE("short response: protocol error naming the field") {
  TestServer server([](httplib::Server& s) {
    s.Post("/translate", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(json{{"translations", {"only", "two"}}}.dump(), "application/json");
    });
  });
  HttpTranslationBackend backend(server.url(), fast_retries());
  try {
    backend.translate({"a", "b", "c"}, Lang::en, Lang::ru);
    FAIL("expected ProtocolError");
  } catch (const ProtocolError& e) {
    CHECK(std::string(e.what()).find("translations") != std::string::npos);
  }
}

TEST_CASE("persistent failure: transport error after the retry budget") {
  std::atomic<int> calls{0};
  TestServer server([&](httplib::Server& s) {
    s.Post("/translate", [&](const httplib::Request&, httplib::Response& res) {
      calls.fetch_add(1);
      res.status = 503;
    });
  });
  HttpTranslationBackend backend(server.url(), fast_retries());
  CHECK_THROWS_AS(backend.translate({"x"}, Lang::en, Lang::zh), TransportError);
  CHECK(calls.load() == 3);
}

TEST_CASE("unreachable host is a transport error") {
  RetryPolicy policy = fast_retries();
  policy.retries = 2;
  HttpTranslationBackend backend("http://127.0.0.1:1", policy);
  CHECK_THROWS_AS(backend.translate({"x"}, Lang::en, Lang::zh), TransportError);
}

TEST_CASE("bearer token is passed through") {
  std::string seen_auth;
  TestServer server([&](httplib::Server& s) {
    s.Post("/translate", [&](const httplib::Request& req, httplib::Response& res) {
      seen_auth = req.get_header_value("Authorization");
      json body = json::parse(req.body);
      res.set_content(json{{"translations", body["texts"]}}.dump(), "application/json");
    });
  });
  RetryPolicy policy = fast_retries();
  policy.auth_token = "sekret";
  HttpTranslationBackend backend(server.url(), policy);
  backend.translate({"x"}, Lang::en, Lang::zh);
  CHECK(seen_auth == "Bearer sekret");
}

TEST_CASE("batch cap splits requests while preserving order") {
  std::atomic<int> requests{0};
  TestServer server([&](httplib::Server& s) {
    s.Post("/translate", [&](const httplib::Request& req, httplib::Response& res) {
      requests.fetch_add(1);
      json body = json::parse(req.body);
      res.set_content(json{{"translations", body["texts"]}}.dump(), "application/json");
    });
  });
  RetryPolicy policy = fast_retries();
  policy.batch_cap = 4;
  HttpTranslationBackend backend(server.url(), policy);
  std::vector<std::string> texts;
  for (int i = 0; i < 10; ++i) texts.push_back("t" + std::to_string(i));
  CHECK(backend.translate(texts, Lang::en, Lang::ja) == texts);
  CHECK(requests.load() == 3);
}

TEST_CASE("served mock backends round trip over the wire") {
  MockTranslationBackend translation;
  MockEmbeddingBackend embedding;
  MockGenerationBackend generation;
  TestServer server([&](httplib::Server& s) {
    register_backend_routes(s, translation, embedding, generation);
  });

  HttpTranslationBackend remote(server.url(), fast_retries());
  std::string forward = remote.translate({"hello world"}, Lang::en, Lang::zh)[0];
  CHECK(forward == mock_translate_text("hello world", Lang::en, Lang::zh));
  CHECK(remote.translate({forward}, Lang::zh, Lang::en)[0] == "hello world");

  HttpEmbeddingBackend embed(server.url(), fast_retries());
  CHECK(embed.embed({"hello"}, EmbedKind::text)[0] ==
        mock_embed_vector("hello", EmbedKind::text));

  HttpGenerationBackend gen(server.url(), fast_retries());
  CHECK(gen.generate("prompt", {"img"}, 8) == generation.generate("prompt", {"img"}, 8));

  // server-side validation errors surface as protocol errors, not retries
  CHECK_THROWS_AS(remote.translate({"x"}, Lang::en, Lang::en), ProtocolError);
}

TEST_CASE("embedding and generation adapters validate shapes") {
  TestServer server([](httplib::Server& s) {
    s.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
      json body = json::parse(req.body);
      json vectors = json::array();
      for (std::size_t i = 0; i < body["items"].size(); ++i) {
        vectors.push_back({0.1, 0.2, 0.3});
      }
      res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
    });
    s.Post("/generate", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(json{{"text", "Answer: B"}}.dump(), "application/json");
    });
  });
  HttpEmbeddingBackend embed(server.url(), fast_retries());
  auto vectors = embed.embed({"a", "b"}, EmbedKind::text);
  REQUIRE(vectors.size() == 2);
  CHECK(vectors[1][2] == doctest::Approx(0.3));

  HttpGenerationBackend gen(server.url(), fast_retries());
  CHECK(gen.generate("q", {}, 16) == "Answer: B");
}

TEST_CASE("mixed vector dimensions are a protocol error") {
  TestServer server([](httplib::Server& s) {
    s.Post("/embed", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(json{{"vectors", {{0.1, 0.2}, {0.1}}}}.dump(), "application/json");
    });
  });
  HttpEmbeddingBackend embed(server.url(), fast_retries());
  CHECK_THROWS_AS(embed.embed({"a", "b"}, EmbedKind::text), ProtocolError);
}

TEST_CASE("backend factory dispatches on scheme") {
  CHECK(make_translation_backend("mock:")->describe() == "mock:translate");
  CHECK(make_translation_backend("mock:uppercase")->describe() == "mock:uppercase");
  CHECK(make_embedding_backend("mock:")->describe() == "mock:embed");
  CHECK(make_generation_backend("mock:")->describe() == "mock:generate");
  CHECK(make_translation_backend("http://h:1")->describe() == "http://h:1");
  CHECK_THROWS_AS(make_translation_backend("ftp://nope"), ValidationError);
}
