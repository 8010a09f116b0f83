#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "taxon/corpus.hpp"

namespace taxon::embed {

struct EmbedServiceConfig {
  std::string base_url;   // e.g. http://localhost:8080
  std::string model;      // opaque model identifier, passed through
  int batch_size = 64;
  int retries = 3;
  int backoff_ms = 100;   // first retry delay, doubles per attempt
  int timeout_s = 60;
  // Bearer token read from TAXON_EMBED_TOKEN when present.
};

// POST {base_url}/v1/embeddings per batch of input texts; one embedding row
// per text, input order preserved. Retries with exponential backoff.
corpus::EmbeddingMatrix embed_remote(const std::vector<std::string>& texts,
                                     const EmbedServiceConfig& service);

}  // namespace taxon::embed
