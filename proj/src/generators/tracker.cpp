#include "ensprompt/generators/tracker.hpp"

#include <algorithm>

#include "ensprompt/errors.hpp"

namespace ensprompt {

using nlohmann::json;

BadCaseTracker::BadCaseTracker(const BadCaseTracker& other) : entries_(other.snapshot()) {}

BadCaseTracker& BadCaseTracker::operator=(const BadCaseTracker& other) {
  if (this != &other) {
    auto copy = other.snapshot();
    std::lock_guard lock(mutex_);
    entries_ = std::move(copy);
  }
  return *this;
}

void BadCaseTracker::record(const EvaluationRecord& record) {
  std::lock_guard lock(mutex_);
  for (const auto& outcome : record.per_example) {
    if (outcome.correct) continue;
    auto& entry = entries_[outcome.example_id];
    ++entry.failure_count;
    entry.failed_prompt_ids.insert(record.prompt_id);
  }
}

std::map<std::string, FailureEntry> BadCaseTracker::snapshot() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::vector<std::pair<std::string, FailureEntry>> BadCaseTracker::top(std::size_t k) const {
  auto entries = snapshot();
  std::vector<std::pair<std::string, FailureEntry>> ranked(entries.begin(), entries.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.failure_count != b.second.failure_count) {
      return a.second.failure_count > b.second.failure_count;
    }
    return a.first < b.first;
  });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

bool BadCaseTracker::empty() const {
  std::lock_guard lock(mutex_);
  return entries_.empty();
}

std::size_t BadCaseTracker::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::size_t BadCaseTracker::total_failures() const {
  std::lock_guard lock(mutex_);
  std::size_t total = 0;
  for (const auto& [id, entry] : entries_) total += entry.failure_count;
  return total;
}

json BadCaseTracker::to_json() const {
  json out = json::object();
  for (const auto& [id, entry] : snapshot()) {
    out[id] = {{"failure_count", entry.failure_count}, {"failed_prompt_ids", entry.failed_prompt_ids}};
  }
  return out;
}

BadCaseTracker BadCaseTracker::from_json(const json& doc) {
  if (!doc.is_object()) throw LoadError("bad-case tracker must be a JSON object");
  BadCaseTracker tracker;
  for (const auto& [id, value] : doc.items()) {
    FailureEntry entry;
    entry.failure_count = value.at("failure_count").get<std::size_t>();
    entry.failed_prompt_ids = value.at("failed_prompt_ids").get<std::set<std::string>>();
    if (entry.failure_count == 0) throw LoadError("bad-case tracker entry '" + id + "' has zero failures");
    tracker.entries_.emplace(id, std::move(entry));
  }
  return tracker;
}

}  // namespace ensprompt
