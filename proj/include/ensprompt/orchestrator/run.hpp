#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensprompt/core/types.hpp"
#include "ensprompt/generators/templates.hpp"
#include "ensprompt/llm/call_log.hpp"
#include "ensprompt/llm/client.hpp"
#include "ensprompt/llm/evaluator.hpp"
#include "ensprompt/orchestrator/config.hpp"
#include "ensprompt/orchestrator/state.hpp"

namespace ensprompt {

struct TaskData {
  std::vector<Example> train;  // after any dev carve-out
  std::vector<Example> eval;   // the part of train candidates are scored on
  std::vector<Example> dev;    // empty unless weights are fitted on dev
  std::vector<Example> test;
  LabelSpace label_space;
  Metric metric = Metric::macro_f1;
};

// Loads and validates the datasets named in the config. Throws LoadError.
TaskData load_task_data(const RunConfig& config);

// Clients named by the config. A scripted provider reads `script`, which is
// either one script for every role or {"task": ..., "optimizer": ...}.
std::unique_ptr<ChatClient> make_chat_client(const ModelConfig& model, const std::string& role,
                                             const nlohmann::json* script);
std::unique_ptr<Embedder> make_embedder(const EmbeddingConfig& config);

// The iteration loop over one RunState. Clients are borrowed; the call log
// is only used to tag phases.
class Orchestrator {
 public:
  Orchestrator(RunConfig config, TaskData data, ChatClient& task, ChatClient& optimizer, Embedder& embedder,
               CallLog& log, TemplateSet templates = TemplateSet::defaults());

  // Fresh state: seed prompts embedded and evaluated, population = seeds.
  void initialize();
  void restore(RunState state);

  bool iterations_done() const { return state_.iteration >= config_.iterations; }
  // One generate -> search -> evaluate -> update round.
  void step();
  // Member selection, weight fitting and test evaluation.
  void finish();

  const RunState& state() const { return state_; }
  RunState& state() { return state_; }
  const RunConfig& config() const { return config_; }
  const TaskData& data() const { return data_; }

  // Client replay state and call counters folded into the state.
  void sync_bookkeeping();

 private:
  double evaluate_candidate(const std::string& id);
  bool admit(PromptCandidate candidate, std::map<std::string, std::size_t>& generated);
  std::string next_id();

  RunConfig config_;
  TaskData data_;
  ChatClient& task_;
  ChatClient& optimizer_;
  Embedder& embedder_;
  CallLog& log_;
  TemplateSet templates_;
  TaskEvaluator evaluator_;
  RunState state_;
};

struct RunOptions {
  bool resume = false;
  std::optional<std::size_t> stop_after;  // iterations to run in this invocation
  bool write_timing = true;
};

struct RunOutcome {
  RunState state;
  nlohmann::json report;
  std::filesystem::path artifact_dir;
};

// Full run in config.artifact_dir: config snapshot, call log, checkpoint
// after every iteration, then report.json and ensemble.json. A failure
// leaves the last checkpoint in place and rethrows.
RunOutcome run_optimize(const RunConfig& config, const RunOptions& options = {});

}  // namespace ensprompt
