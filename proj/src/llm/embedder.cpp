#include "ensprompt/llm/embedder.hpp"

#include <cstdint>

#include <json.hpp>

#include "ensprompt/errors.hpp"

namespace ensprompt {

using nlohmann::json;

namespace {

std::uint32_t fnv1a32(std::string_view bytes) {
  std::uint32_t hash = 0x811c9dc5u;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x01000193u;
  }
  return hash;
}

}  // namespace

HashingEmbedder::HashingEmbedder(std::size_t dimension, std::size_t ngram)
    : dimension_(dimension), ngram_(ngram) {
  if (dimension_ == 0 || ngram_ == 0) {
    throw ContractViolation("HashingEmbedder: dimension and n-gram size must be positive");
  }
}

EmbeddingVector HashingEmbedder::embed(std::string_view text) {
  if (text.empty()) throw ContractViolation("embed: empty text");
  EmbeddingVector counts(dimension_, 0.0);
  if (text.size() < ngram_) {
    counts[fnv1a32(text) % dimension_] += 1.0;
  } else {
    for (std::size_t i = 0; i + ngram_ <= text.size(); ++i) {
      counts[fnv1a32(text.substr(i, ngram_)) % dimension_] += 1.0;
    }
  }
  l2_normalize(counts);
  return counts;
}

HttpEmbedder::HttpEmbedder(HttpSettings settings)
    : settings_(std::move(settings)),
      limiter_(std::make_unique<InFlightLimiter>(settings_.max_in_flight)) {}

EmbeddingVector HttpEmbedder::embed(std::string_view text) {
  if (text.empty()) throw ContractViolation("embed: empty text");
  json body{{"model", settings_.model}, {"input", std::string(text)}};
  HttpResult result = post_with_retries(settings_, settings_.embeddings_path, body.dump(), *limiter_);
  json reply = json::parse(result.body, nullptr, /*allow_exceptions=*/false);
  EmbeddingVector values;
  try {
    values = reply.at("data").at(0).at("embedding").get<EmbeddingVector>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("embeddings endpoint reply has unexpected shape: ") + e.what());
  }
  if (values.empty()) throw TransportError("embeddings endpoint returned an empty vector");
  l2_normalize(values);
  std::lock_guard lock(mutex_);
  if (!dimension_) {
    dimension_ = values.size();
  } else if (*dimension_ != values.size()) {
    throw ContractViolation("embedding dimension changed from " + std::to_string(*dimension_) +
                            " to " + std::to_string(values.size()));
  }
  return values;
}

std::size_t HttpEmbedder::dimension() const {
  std::lock_guard lock(mutex_);
  return dimension_.value_or(0);
}

}  // namespace ensprompt
