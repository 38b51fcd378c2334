#include "ensprompt/llm/scripted_client.hpp"

#include <algorithm>

#include "ensprompt/errors.hpp"

namespace ensprompt {

using nlohmann::json;

namespace {

bool contains_all(const std::vector<std::string>& needles, std::string_view haystack) {
  for (const auto& needle : needles) {
    if (haystack.find(needle) == std::string_view::npos) return false;
  }
  return true;
}

std::vector<std::string> string_list(const json& value, const char* what) {
  std::vector<std::string> out;
  if (value.is_string()) {
    out.push_back(value.get<std::string>());
  } else if (value.is_array()) {
    for (const auto& item : value) {
      if (!item.is_string()) throw LoadError(std::string("script: ") + what + " must hold strings");
      out.push_back(item.get<std::string>());
    }
  } else if (!value.is_null()) {
    throw LoadError(std::string("script: ") + what + " must be a string or list");
  }
  return out;
}

}  // namespace

ScriptedClient::ScriptedClient(std::vector<std::string> queue) : queue_(std::move(queue)) {}

std::unique_ptr<ScriptedClient> ScriptedClient::from_json(const json& script) {
  if (!script.is_object()) throw LoadError("script must be a JSON object");
  auto owned = std::make_unique<ScriptedClient>();
  ScriptedClient& client = *owned;
  if (script.contains("queue")) {
    client.queue_ = string_list(script["queue"], "queue");
  }
  if (script.contains("keyed")) {
    if (!script["keyed"].is_object()) throw LoadError("script: keyed must be an object");
    for (const auto& [fingerprint, response] : script["keyed"].items()) {
      if (!response.is_string()) throw LoadError("script: keyed responses must be strings");
      client.keyed_.emplace(fingerprint, response.get<std::string>());
    }
  }
  if (script.contains("rules")) {
    if (!script["rules"].is_array()) throw LoadError("script: rules must be a list");
    for (const auto& item : script["rules"]) {
      if (!item.is_object() || !item.contains("response") || !item["response"].is_string()) {
        throw LoadError("script: every rule needs a string 'response'");
      }
      Rule rule;
      rule.system_contains = string_list(item.value("system_contains", json()), "system_contains");
      rule.user_contains = string_list(item.value("user_contains", json()), "user_contains");
      rule.response = item["response"].get<std::string>();
      client.rules_.push_back(std::move(rule));
    }
  }
  if (script.contains("default")) {
    if (!script["default"].is_string()) throw LoadError("script: default must be a string");
    client.default_ = script["default"].get<std::string>();
  }
  return owned;
}

void ScriptedClient::push(std::string response) {
  std::lock_guard lock(mutex_);
  queue_.push_back(std::move(response));
}

void ScriptedClient::add_keyed(std::string fingerprint, std::string response) {
  std::lock_guard lock(mutex_);
  keyed_[std::move(fingerprint)] = std::move(response);
}

void ScriptedClient::add_rule(Rule rule) {
  std::lock_guard lock(mutex_);
  rules_.push_back(std::move(rule));
}

void ScriptedClient::set_default(std::string response) {
  std::lock_guard lock(mutex_);
  default_ = std::move(response);
}

std::string ScriptedClient::complete(const ChatRequest& request) {
  validate(request);
  std::lock_guard lock(mutex_);
  history_.push_back(request);
  if (!keyed_.empty()) {
    auto it = keyed_.find(request_fingerprint(request));
    if (it != keyed_.end()) return it->second;
  }
  const std::string system = request.system_text.value_or("");
  for (const auto& rule : rules_) {
    if (contains_all(rule.system_contains, system) &&
        contains_all(rule.user_contains, request.user_text)) {
      return rule.response;
    }
  }
  if (cursor_ < queue_.size()) return queue_[cursor_++];
  if (default_) return *default_;
  throw ScriptExhausted("scripted client has no response left (call #" +
                        std::to_string(history_.size()) + ")");
}

json ScriptedClient::save_state() const {
  std::lock_guard lock(mutex_);
  return json{{"cursor", cursor_}, {"calls", restored_calls_ + history_.size()}};
}

void ScriptedClient::restore_state(const json& state) {
  if (!state.is_object() || !state.contains("cursor")) return;
  std::lock_guard lock(mutex_);
  cursor_ = state["cursor"].get<std::size_t>();
  restored_calls_ = state.value("calls", std::size_t{0}) - std::min(state.value("calls", std::size_t{0}), history_.size());
  if (cursor_ > queue_.size()) {
    throw LoadError("scripted client state points past the end of its queue");
  }
}

std::size_t ScriptedClient::calls() const {
  std::lock_guard lock(mutex_);
  return restored_calls_ + history_.size();
}

std::size_t ScriptedClient::remaining_queue() const {
  std::lock_guard lock(mutex_);
  return queue_.size() - cursor_;
}

std::vector<ChatRequest> ScriptedClient::history() const {
  std::lock_guard lock(mutex_);
  return history_;
}

}  // namespace ensprompt
