#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensprompt/core/types.hpp"
#include "ensprompt/ensemble/weights.hpp"
#include "ensprompt/llm/client.hpp"
#include "ensprompt/llm/evaluator.hpp"

namespace ensprompt {

inline constexpr int kEnsembleFormatVersion = 1;
inline constexpr std::string_view kTieBreakRule = "lexicographic_label";

struct EnsembleModel {
  std::vector<PromptCandidate> members;
  std::vector<double> weights;
  EnsembleConfig config;
  LabelSpace label_space;
  Metric metric = Metric::macro_f1;
  TaskModelSettings task;

  // Throws ContractViolation on duplicate member ids, a weight count that
  // differs from the member count, or infeasible weights.
  void validate() const;
};

// Up to M members: k-means the embeddings into M clusters, take the best
// scorer of each cluster (ties by id), then top up with the best remaining
// candidates. A population of at most M is returned whole. Output is sorted
// by score descending, ties by id.
std::vector<PromptCandidate> select_members(std::span<const PromptCandidate> population, std::size_t m,
                                            std::uint64_t seed);

// Parsed predictions of every member on every example.
PredictionMatrix build_prediction_matrix(std::span<const PromptCandidate> members,
                                         std::span<const Example> examples, TaskEvaluator& evaluator);

// One task-model call per member (prompt as system text, query as user
// text), parse, then weighted_vote.
Prediction predict(const EnsembleModel& model, const std::string& query, ChatClient& task_client);

nlohmann::json ensemble_to_json(const EnsembleModel& model);
EnsembleModel ensemble_from_json(const nlohmann::json& doc);
void save_ensemble(const EnsembleModel& model, const std::filesystem::path& path);
EnsembleModel load_ensemble(const std::filesystem::path& path);

}  // namespace ensprompt
