#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ensprompt {

struct ChatRequest {
  std::optional<std::string> system_text;
  std::string user_text;
  double temperature = 0.0;
  int max_output = 1024;
  std::string model_id;
};

// Throws ContractViolation for an empty user text, negative temperature or
// non-positive output cap.
void validate(const ChatRequest& request);

// Stable 16-hex-digit FNV-1a hash of (system_text, user_text).
std::string request_fingerprint(const ChatRequest& request);
std::string request_fingerprint(std::string_view system_text, std::string_view user_text);

class ChatClient {
 public:
  virtual ~ChatClient() = default;

  virtual std::string complete(const ChatRequest& request) = 0;

  // Upper bound on concurrent complete() calls this client accepts.
  virtual std::size_t max_in_flight() const { return 1; }

  // Opaque replay state (scripted clients); null for stateless clients.
  virtual nlohmann::json save_state() const { return nullptr; }
  virtual void restore_state(const nlohmann::json& /*state*/) {}
};

using EmbeddingVector = std::vector<double>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) = 0;
  virtual std::size_t dimension() const = 0;
};

// In-place L2 normalization. Throws NumericError for zero or non-finite input.
void l2_normalize(EmbeddingVector& values);

}  // namespace ensprompt
