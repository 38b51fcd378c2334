#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>

#include "ensprompt/llm/client.hpp"
#include "ensprompt/llm/http_client.hpp"

namespace ensprompt {

// Offline embedder: counts of hashed character n-grams (bytes, n = 3 by
// default) in `dimension` buckets, L2-normalized. Texts shorter than n
// contribute a single gram made of the whole text.
class HashingEmbedder : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dimension = 256, std::size_t ngram = 3);

  EmbeddingVector embed(std::string_view text) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::size_t dimension_;
  std::size_t ngram_;
};

// Embeddings endpoint: {"model", "input"} -> {"data": [{"embedding": [...]}]}.
// The first response fixes the run dimension; later mismatches throw.
class HttpEmbedder : public Embedder {
 public:
  explicit HttpEmbedder(HttpSettings settings);

  EmbeddingVector embed(std::string_view text) override;
  std::size_t dimension() const override;

 private:
  HttpSettings settings_;
  std::unique_ptr<InFlightLimiter> limiter_;
  mutable std::mutex mutex_;
  std::optional<std::size_t> dimension_;
};

}  // namespace ensprompt
