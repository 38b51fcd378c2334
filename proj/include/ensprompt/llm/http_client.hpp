#pragma once

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

#include "ensprompt/llm/client.hpp"

namespace ensprompt {

struct HttpSettings {
  std::string base_url = "http://127.0.0.1:8000";  // scheme://host[:port]
  std::string chat_path = "/v1/chat/completions";
  std::string embeddings_path = "/v1/embeddings";
  std::string model;
  std::string api_key_env;  // empty: no Authorization header
  double timeout_seconds = 60.0;
  int max_retries = 3;
  std::chrono::milliseconds backoff_initial{500};
  std::chrono::milliseconds backoff_max{8000};
  std::size_t max_in_flight = 4;
};

// Counting limiter shared by the chat and embedding transports.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(std::size_t limit);
  void acquire() { slots_.acquire(); }
  void release() { slots_.release(); }
  std::size_t limit() const { return limit_; }

 private:
  static constexpr std::ptrdiff_t kMaxSlots = 1024;
  std::size_t limit_;
  std::counting_semaphore<kMaxSlots> slots_;
};

struct HttpResult {
  int status = 0;  // 0: connection-level failure
  std::string body;
};

// POST a JSON body with retries on connection errors, 429 and 5xx.
// Other 4xx statuses fail immediately. Throws TransportError when the
// retry budget (max_retries + 1 attempts) is spent.
HttpResult post_with_retries(const HttpSettings& settings, const std::string& path,
                             const std::string& body, InFlightLimiter& limiter,
                             std::size_t* attempts_out = nullptr);

// Chat-completions style endpoint:
//   request  {"model", "messages": [{"role", "content"}...], "temperature", "max_tokens"}
//   response {"choices": [{"message": {"content": ...}}]}
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(HttpSettings settings);

  std::string complete(const ChatRequest& request) override;
  std::size_t max_in_flight() const override { return limiter_->limit(); }

  std::size_t last_attempts() const { return last_attempts_; }

 private:
  HttpSettings settings_;
  std::unique_ptr<InFlightLimiter> limiter_;
  std::size_t last_attempts_ = 0;
};

}  // namespace ensprompt
