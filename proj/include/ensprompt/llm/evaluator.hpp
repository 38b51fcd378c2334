#pragma once

#include <span>
#include <string>

#include "ensprompt/core/types.hpp"
#include "ensprompt/llm/client.hpp"

namespace ensprompt {

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual EvaluationRecord evaluate(const PromptCandidate& prompt,
                                    std::span<const Example> examples) = 0;
};

struct TaskModelSettings {
  std::string model_id = "task-model";
  double temperature = 0.0;
  int max_output = 1024;
};

// Runs the task model with the prompt as system text and each example input
// as user text, then parses and scores the outputs.
class TaskEvaluator : public Evaluator {
 public:
  TaskEvaluator(ChatClient& client, LabelSpace label_space, Metric metric,
                TaskModelSettings settings = {});

  EvaluationRecord evaluate(const PromptCandidate& prompt,
                            std::span<const Example> examples) override;

  // Raw outputs only, in example order (used for prediction matrices).
  std::vector<std::string> raw_outputs(const std::string& prompt_text,
                                       std::span<const Example> examples);

  const LabelSpace& label_space() const { return label_space_; }
  Metric metric() const { return metric_; }

 private:
  ChatClient& client_;
  LabelSpace label_space_;
  Metric metric_;
  TaskModelSettings settings_;
};

}  // namespace ensprompt
