#include "ensprompt/llm/call_log.hpp"

#include "ensprompt/errors.hpp"

namespace ensprompt {

using nlohmann::json;

CallLog::CallLog(const std::filesystem::path& path)
    : out_(std::make_unique<std::ofstream>(path, std::ios::app | std::ios::binary)) {
  if (!*out_) throw LoadError("cannot open call log '" + path.string() + "'");
}

void CallLog::set_phase(std::string phase) {
  std::lock_guard lock(mutex_);
  phase_ = std::move(phase);
}

std::string CallLog::phase() const {
  std::lock_guard lock(mutex_);
  return phase_;
}

void CallLog::record(const std::string& role, const ChatRequest& request, const std::string& response) {
  std::lock_guard lock(mutex_);
  ++counts_[{role, phase_}];
  ++sequence_;
  if (out_) {
    json line{
        {"seq", sequence_},
        {"role", role},
        {"phase", phase_},
        {"model", request.model_id},
        {"fingerprint", request_fingerprint(request)},
        {"temperature", request.temperature},
        {"response", response},
    };
    *out_ << line.dump() << '\n';
    out_->flush();
  }
}

std::size_t CallLog::count(const std::string& role) const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [key, value] : counts_) {
    if (key.first == role) n += value;
  }
  return n;
}

std::size_t CallLog::count(const std::string& role, const std::string& phase) const {
  std::lock_guard lock(mutex_);
  auto it = counts_.find({role, phase});
  return it == counts_.end() ? 0 : it->second;
}

std::size_t CallLog::total() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [key, value] : counts_) n += value;
  return n;
}

std::map<std::string, std::size_t> CallLog::counts_by_key() const {
  std::lock_guard lock(mutex_);
  std::map<std::string, std::size_t> out;
  for (const auto& [key, value] : counts_) out[key.first + "/" + key.second] = value;
  return out;
}

json CallLog::save_counts() const {
  std::lock_guard lock(mutex_);
  json out = json::array();
  for (const auto& [key, value] : counts_) {
    out.push_back({{"role", key.first}, {"phase", key.second}, {"calls", value}});
  }
  return json{{"sequence", sequence_}, {"counts", out}};
}

void CallLog::restore_counts(const json& counts) {
  std::lock_guard lock(mutex_);
  counts_.clear();
  sequence_ = counts.value("sequence", std::size_t{0});
  for (const auto& item : counts.value("counts", json::array())) {
    counts_[{item.at("role").get<std::string>(), item.at("phase").get<std::string>()}] =
        item.at("calls").get<std::size_t>();
  }
}

std::string LoggingClient::complete(const ChatRequest& request) {
  std::string response = inner_.complete(request);
  log_.record(role_, request, response);
  return response;
}

}  // namespace ensprompt
