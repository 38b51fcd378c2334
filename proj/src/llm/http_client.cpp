#include "ensprompt/llm/http_client.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ensprompt/errors.hpp"

namespace ensprompt {

using nlohmann::json;

namespace {

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

std::chrono::milliseconds backoff_delay(const HttpSettings& settings, int attempt) {
  const double scaled = static_cast<double>(settings.backoff_initial.count()) * std::pow(2.0, attempt);
  const double capped = std::min(scaled, static_cast<double>(settings.backoff_max.count()));
  return std::chrono::milliseconds(static_cast<long long>(capped));
}

struct SlotGuard {
  explicit SlotGuard(InFlightLimiter& limiter) : limiter(limiter) { limiter.acquire(); }
  ~SlotGuard() { limiter.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;
  InFlightLimiter& limiter;
};

}  // namespace

InFlightLimiter::InFlightLimiter(std::size_t limit)
    : limit_(std::clamp<std::size_t>(limit, 1, kMaxSlots)),
      slots_(static_cast<std::ptrdiff_t>(limit_)) {}

HttpResult post_with_retries(const HttpSettings& settings, const std::string& path,
                             const std::string& body, InFlightLimiter& limiter,
                             std::size_t* attempts_out) {
  httplib::Headers headers;
  if (!settings.api_key_env.empty()) {
    const char* key = std::getenv(settings.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw TransportError("credential environment variable '" + settings.api_key_env +
                           "' is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const auto timeout = std::chrono::duration<double>(settings.timeout_seconds);
  const int max_attempts = std::max(0, settings.max_retries) + 1;
  HttpResult last;
  std::string last_error;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    if (attempts_out != nullptr) *attempts_out = static_cast<std::size_t>(attempt + 1);
    if (attempt > 0) std::this_thread::sleep_for(backoff_delay(settings, attempt - 1));
    {
      SlotGuard slot(limiter);
      httplib::Client client(settings.base_url);
      client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      auto response = client.Post(path, headers, body, "application/json");
      if (response) {
        last.status = response->status;
        last.body = response->body;
        last_error = "HTTP " + std::to_string(response->status);
      } else {
        last.status = 0;
        last.body.clear();
        last_error = httplib::to_string(response.error());
      }
    }
    if (last.status >= 200 && last.status < 300) return last;
    if (!retryable(last.status)) {
      throw TransportError("POST " + settings.base_url + path + " failed: " + last_error);
    }
  }
  throw TransportError("POST " + settings.base_url + path + " failed after " +
                       std::to_string(max_attempts) + " attempts: " + last_error);
}

HttpChatClient::HttpChatClient(HttpSettings settings)
    : settings_(std::move(settings)),
      limiter_(std::make_unique<InFlightLimiter>(settings_.max_in_flight)) {}

std::string HttpChatClient::complete(const ChatRequest& request) {
  validate(request);
  json messages = json::array();
  if (request.system_text) {
    messages.push_back({{"role", "system"}, {"content", *request.system_text}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_text}});
  json body{
      {"model", request.model_id.empty() ? settings_.model : request.model_id},
      {"messages", std::move(messages)},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output},
  };
  std::size_t attempts = 0;
  HttpResult result = post_with_retries(settings_, settings_.chat_path, body.dump(), *limiter_, &attempts);
  last_attempts_ = attempts;

  json reply = json::parse(result.body, nullptr, /*allow_exceptions=*/false);
  if (reply.is_discarded()) throw TransportError("chat endpoint returned non-JSON body");
  try {
    const json& content = reply.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return {};
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("chat endpoint reply has unexpected shape: ") + e.what());
  }
}

}  // namespace ensprompt
