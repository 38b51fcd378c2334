#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensprompt/core/pool.hpp"
#include "ensprompt/core/types.hpp"
#include "ensprompt/ensemble/ensemble.hpp"
#include "ensprompt/generators/tracker.hpp"
#include "ensprompt/rng.hpp"

namespace ensprompt {

inline constexpr int kStateFormatVersion = 1;

struct HistoryEntry {
  std::string prompt_id;
  double score = 0.0;

  bool operator==(const HistoryEntry&) const = default;
};

struct IterationSummary {
  std::size_t iteration = 0;  // 1-based
  double best_score = 0.0;
  std::string best_id;
  std::vector<std::string> population;
  std::size_t pool_size = 0;
  std::size_t evaluated_total = 0;
  std::map<std::string, std::size_t> generated;  // origin -> new pool members
  std::vector<std::string> bayes_picks;
  std::vector<std::string> mab_picks;
  std::vector<std::string> newly_evaluated;

  bool operator==(const IterationSummary&) const = default;
};

// Everything measured once the ensemble exists.
struct FinalResults {
  std::string fit_split;
  double objective = 0.0;
  double uniform_objective = 0.0;
  double train_macro_f1 = 0.0;
  double train_accuracy = 0.0;
  double test_macro_f1 = 0.0;
  double test_accuracy = 0.0;
  std::vector<double> member_train_macro_f1;
  std::vector<double> member_train_accuracy;
  std::vector<double> member_test_macro_f1;
  std::vector<double> member_test_accuracy;

  bool operator==(const FinalResults&) const = default;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t eval = 0;
  std::size_t dev = 0;
  std::size_t test = 0;

  bool operator==(const SplitSizes&) const = default;
};

struct RunState {
  std::size_t iteration = 0;  // completed iterations
  bool completed = false;
  CandidatePool pool;
  std::vector<std::string> population;
  BadCaseTracker tracker;
  std::vector<HistoryEntry> history;  // one entry per evaluated candidate
  Rng rng;
  std::size_t next_id = 0;
  std::map<std::string, EvaluationRecord> train_records;
  std::vector<IterationSummary> trajectory;
  nlohmann::json client_state = nlohmann::json::object();
  nlohmann::json call_counts = nlohmann::json::object();
  std::optional<EnsembleModel> ensemble;
  std::optional<FinalResults> results;
  SplitSizes splits;

  double best_score() const;
  std::vector<PromptCandidate> population_candidates() const;
};

nlohmann::json state_to_json(const RunState& state);
// Throws LoadError on a version mismatch (naming both versions) or a
// malformed document.
RunState state_from_json(const nlohmann::json& doc);

// Atomic write of `<dir>/state.json` (temp file + rename).
void checkpoint(const RunState& state, const std::filesystem::path& dir);
RunState resume(const std::filesystem::path& dir);

// Write-then-rename so readers never see a half-written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace ensprompt
