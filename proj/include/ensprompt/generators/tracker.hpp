#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensprompt/core/types.hpp"

namespace ensprompt {

struct FailureEntry {
  std::size_t failure_count = 0;
  std::set<std::string> failed_prompt_ids;

  bool operator==(const FailureEntry&) const = default;
};

// Global ledger of which examples fail, how often, and under which prompts.
// Counts only ever grow: one increment per failed example per recorded
// evaluation, so re-recording the same evaluation counts twice while the
// prompt-id set stays the same.
class BadCaseTracker {
 public:
  BadCaseTracker() = default;
  BadCaseTracker(const BadCaseTracker& other);
  BadCaseTracker& operator=(const BadCaseTracker& other);

  // Atomic batch update from one evaluation.
  void record(const EvaluationRecord& record);

  // Consistent copy of all entries.
  std::map<std::string, FailureEntry> snapshot() const;

  // Entries ordered by failure count descending, example id ascending;
  // at most k of them.
  std::vector<std::pair<std::string, FailureEntry>> top(std::size_t k) const;

  bool empty() const;
  std::size_t size() const;
  std::size_t total_failures() const;

  nlohmann::json to_json() const;
  static BadCaseTracker from_json(const nlohmann::json& doc);

  bool operator==(const BadCaseTracker& other) const { return snapshot() == other.snapshot(); }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, FailureEntry> entries_;
};

inline BadCaseTracker& record_failures(BadCaseTracker& tracker, const EvaluationRecord& record) {
  tracker.record(record);
  return tracker;
}

}  // namespace ensprompt
