#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "ensprompt/llm/client.hpp"

namespace ensprompt {

// Append-only record of every model call, tagged with role and run phase.
class CallLog {
 public:
  CallLog() = default;
  // Appends JSON lines to `path` (created if missing).
  explicit CallLog(const std::filesystem::path& path);

  void set_phase(std::string phase);
  std::string phase() const;

  void record(const std::string& role, const ChatRequest& request, const std::string& response);

  std::size_t count(const std::string& role) const;
  std::size_t count(const std::string& role, const std::string& phase) const;
  std::size_t total() const;
  std::map<std::string, std::size_t> counts_by_key() const;  // "role/phase" -> calls

  // Counters survive checkpoint/resume through these.
  nlohmann::json save_counts() const;
  void restore_counts(const nlohmann::json& counts);

 private:
  mutable std::mutex mutex_;
  std::string phase_ = "setup";
  std::map<std::pair<std::string, std::string>, std::size_t> counts_;
  std::size_t sequence_ = 0;
  std::unique_ptr<std::ofstream> out_;
};

// Decorator that forwards to `inner` and records each call in `log`.
class LoggingClient : public ChatClient {
 public:
  LoggingClient(ChatClient& inner, CallLog& log, std::string role)
      : inner_(inner), log_(log), role_(std::move(role)) {}

  std::string complete(const ChatRequest& request) override;
  std::size_t max_in_flight() const override { return inner_.max_in_flight(); }
  nlohmann::json save_state() const override { return inner_.save_state(); }
  void restore_state(const nlohmann::json& state) override { inner_.restore_state(state); }

 private:
  ChatClient& inner_;
  CallLog& log_;
  std::string role_;
};

}  // namespace ensprompt
