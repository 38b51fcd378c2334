#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensprompt/llm/client.hpp"

namespace ensprompt {

// Deterministic stand-in model. A request is answered by the first source
// that has something for it:
//   1. keyed   - exact request fingerprint -> response
//   2. rules   - first rule whose substrings all occur in system/user text
//   3. queue   - next unread entry of an ordered list
//   4. default - fixed fallback text
// Nothing matched -> ScriptExhausted.
class ScriptedClient : public ChatClient {
 public:
  struct Rule {
    std::vector<std::string> system_contains;
    std::vector<std::string> user_contains;
    std::string response;
  };

  ScriptedClient() = default;
  explicit ScriptedClient(std::vector<std::string> queue);

  // {"queue": [...], "keyed": {fp: text}, "rules": [...], "default": text}
  static std::unique_ptr<ScriptedClient> from_json(const nlohmann::json& script);

  void push(std::string response);
  void add_keyed(std::string fingerprint, std::string response);
  void add_rule(Rule rule);
  void set_default(std::string response);

  std::string complete(const ChatRequest& request) override;

  nlohmann::json save_state() const override;
  void restore_state(const nlohmann::json& state) override;

  std::size_t calls() const;
  std::size_t remaining_queue() const;
  std::vector<ChatRequest> history() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> queue_;
  std::size_t cursor_ = 0;
  std::map<std::string, std::string> keyed_;
  std::vector<Rule> rules_;
  std::optional<std::string> default_;
  std::vector<ChatRequest> history_;
  std::size_t restored_calls_ = 0;  // calls made before a restore_state
};

}  // namespace ensprompt
