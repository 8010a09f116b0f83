#include "taxon/embed.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "taxon/common.hpp"

namespace taxon::embed {

namespace {

// One POST with retries; returns the parsed embedding rows for the batch.
std::vector<std::vector<double>> embed_batch(
    httplib::Client& client, const EmbedServiceConfig& cfg,
    const std::vector<std::string>& batch) {
  nlohmann::json body;
  body["model"] = cfg.model;
  body["input"] = batch;
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
    if (attempt > 0) {
      const int delay = cfg.backoff_ms * (1 << (attempt - 1));
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    auto res = client.Post("/v1/embeddings", payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      last_error = std::string("bad JSON response: ") + e.what();
      continue;
    }
    if (!j.contains("data") || !j["data"].is_array())
      throw Error("embedding service response lacks a data array");
    if (j["data"].size() != batch.size())
      throw Error("embedding service returned " +
                  std::to_string(j["data"].size()) + " vectors for " +
                  std::to_string(batch.size()) + " inputs");
    std::vector<std::vector<double>> rows;
    rows.reserve(batch.size());
    for (const auto& item : j["data"]) {
      auto row = item.at("embedding").get<std::vector<double>>();
      for (double v : row)
        if (!std::isfinite(v))
          throw Error("embedding service returned non-finite values");
      rows.push_back(std::move(row));
    }
    return rows;
  }
  throw Error("embedding service unreachable after " +
              std::to_string(cfg.retries) + " retries (" + last_error + ")");
}

}  // namespace

corpus::EmbeddingMatrix embed_remote(const std::vector<std::string>& texts,
                                     const EmbedServiceConfig& service) {
  if (texts.empty()) throw ValidationError("embed_remote: empty text list");
  for (std::size_t i = 0; i < texts.size(); ++i)
    if (texts[i].empty())
      throw ValidationError("embed_remote: empty text at index " +
                            std::to_string(i));
  if (service.base_url.empty())
    throw ValidationError("embed_remote: missing service URL");

  httplib::Client client(service.base_url);
  client.set_connection_timeout(service.timeout_s);
  client.set_read_timeout(service.timeout_s);
  if (const char* token = std::getenv("TAXON_EMBED_TOKEN"))
    client.set_bearer_token_auth(token);

  std::vector<std::vector<double>> all;
  all.reserve(texts.size());
  const std::size_t bs = std::max(1, service.batch_size);
  for (std::size_t start = 0; start < texts.size(); start += bs) {
    const std::size_t end = std::min(texts.size(), start + bs);
    std::vector<std::string> batch(texts.begin() + start, texts.begin() + end);
    auto rows = embed_batch(client, service, batch);
    for (auto& r : rows) all.push_back(std::move(r));
  }

  const std::size_t d = all.front().size();
  for (const auto& r : all)
    if (r.size() != d)
      throw Error("embedding service returned inconsistent dimensions");
  corpus::EmbeddingMatrix out;
  out.rows.resize(all.size(), d);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) out.rows(i, j) = all[i][j];
  out.normalized = false;
  return out;
}

}  // namespace taxon::embed
