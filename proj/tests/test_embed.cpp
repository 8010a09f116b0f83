#include <doctest.h>

#include <atomic>
#include <thread>

#include "taxon/common.hpp"
#include "taxon/embed.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

using namespace taxon;

namespace {

// Serves a deterministic embedding per input text so order checks work:
// row = [index marker parsed from the text, batch echo...]
class MockService {
 public:
  explicit MockService(int fail_first = 0) : fail_first_(fail_first) {
    server_.Post("/v1/embeddings", [this](const httplib::Request& req,
                                          httplib::Response& res) {
      ++requests_;
      if (fail_first_ > 0) {
        --fail_first_;
        res.status = 503;
        return;
      }
      last_auth_ = req.get_header_value("Authorization");
      auto body = nlohmann::json::parse(req.body);
      last_model_ = body.value("model", "");
      nlohmann::json data = nlohmann::json::array();
      for (const auto& text : body.at("input")) {
        const double marker = std::stod(text.get<std::string>().substr(4));
        data.push_back({{"embedding", {marker, 2.0 * marker, 1.0}}});
      }
      res.set_content(nlohmann::json{{"data", data}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockService() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  int port_ = 0;
  std::atomic<int> requests_{0};
  int fail_first_ = 0;
  std::string last_auth_;
  std::string last_model_;

 private:
  httplib::Server server_;
  std::thread thread_;
};

std::vector<std::string> marker_texts(int n) {
  std::vector<std::string> texts;
  for (int i = 0; i < n; ++i) texts.push_back("doc " + std::to_string(i));
  return texts;
}

}  // namespace

TEST_CASE("embed_remote shape, order, batching") {
  MockService svc;
  embed::EmbedServiceConfig cfg;
  cfg.base_url = svc.url();
  cfg.model = "test-model";
  cfg.batch_size = 4;
  auto E = embed::embed_remote(marker_texts(10), cfg);
  REQUIRE(E.n() == 10);
  REQUIRE(E.d() == 3);
  for (int i = 0; i < 10; ++i) {
    CHECK(E.rows(i, 0) == doctest::Approx(double(i)));
    CHECK(E.rows(i, 1) == doctest::Approx(2.0 * i));
  }
  CHECK(svc.requests_.load() == 3);  // ceil(10/4)
  CHECK(svc.last_model_ == "test-model");
}

TEST_CASE("embed_remote preconditions") {
  embed::EmbedServiceConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  CHECK_THROWS_AS(embed::embed_remote({}, cfg), ValidationError);
  CHECK_THROWS_AS(embed::embed_remote({"ok", ""}, cfg), ValidationError);
}

TEST_CASE("embed_remote retries transient failures with backoff") {
  MockService svc(/*fail_first=*/2);
  embed::EmbedServiceConfig cfg;
  cfg.base_url = svc.url();
  cfg.retries = 3;
  cfg.backoff_ms = 1;
  auto E = embed::embed_remote(marker_texts(2), cfg);
  CHECK(E.n() == 2);
  CHECK(svc.requests_.load() == 3);  // 2 failures + 1 success
}

TEST_CASE("embed_remote gives up after retries") {
  MockService svc(/*fail_first=*/100);
  embed::EmbedServiceConfig cfg;
  cfg.base_url = svc.url();
  cfg.retries = 2;
  cfg.backoff_ms = 1;
  CHECK_THROWS_AS(embed::embed_remote(marker_texts(1), cfg), Error);
}

TEST_CASE("wrong-count response is an error") {
  httplib::Server server;
  server.Post("/v1/embeddings", [](const httplib::Request&,
                                   httplib::Response& res) {
    res.set_content(R"({"data":[{"embedding":[1.0,2.0]}]})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  embed::EmbedServiceConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  CHECK_THROWS_WITH_AS(embed::embed_remote({"one", "two"}, cfg),
                       doctest::Contains("returned 1 vectors for 2"), Error);
  server.stop();
  t.join();
}

TEST_CASE("non-finite values rejected") {
  httplib::Server server;
  server.Post("/v1/embeddings", [](const httplib::Request&,
                                   httplib::Response& res) {
    res.set_content(R"({"data":[{"embedding":[1.0,1e999]}]})",
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  embed::EmbedServiceConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  CHECK_THROWS_AS(embed::embed_remote({"one"}, cfg), Error);
  server.stop();
  t.join();
}

TEST_CASE("bearer token from environment reaches the wire") {
  ::setenv("TAXON_EMBED_TOKEN", "sekret-token", 1);
  MockService svc;
  embed::EmbedServiceConfig cfg;
  cfg.base_url = svc.url();
  embed::embed_remote(marker_texts(1), cfg);
  CHECK(svc.last_auth_ == "Bearer sekret-token");
  ::unsetenv("TAXON_EMBED_TOKEN");
}
