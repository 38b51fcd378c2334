#include "ensprompt/llm/evaluator.hpp"

#include <algorithm>
#include <future>

#include "ensprompt/core/labels.hpp"
#include "ensprompt/core/metrics.hpp"

namespace ensprompt {

TaskEvaluator::TaskEvaluator(ChatClient& client, LabelSpace label_space, Metric metric,
                             TaskModelSettings settings)
    : client_(client),
      label_space_(std::move(label_space)),
      metric_(metric),
      settings_(std::move(settings)) {}

std::vector<std::string> TaskEvaluator::raw_outputs(const std::string& prompt_text,
                                                    std::span<const Example> examples) {
  auto ask = [&](const Example& example) {
    ChatRequest request;
    request.system_text = prompt_text;
    request.user_text = example.input;
    request.temperature = settings_.temperature;
    request.max_output = settings_.max_output;
    request.model_id = settings_.model_id;
    return client_.complete(request);
  };

  std::vector<std::string> outputs(examples.size());
  const std::size_t width = client_.max_in_flight();
  if (width <= 1) {
    for (std::size_t i = 0; i < examples.size(); ++i) outputs[i] = ask(examples[i]);
    return outputs;
  }
  // Fan out in waves no wider than the client's in-flight limit; results
  // land by index so the order is independent of completion order.
  for (std::size_t begin = 0; begin < examples.size(); begin += width) {
    const std::size_t end = std::min(examples.size(), begin + width);
    std::vector<std::future<std::string>> wave;
    for (std::size_t i = begin; i < end; ++i) {
      wave.push_back(std::async(std::launch::async, ask, std::cref(examples[i])));
    }
    for (std::size_t i = begin; i < end; ++i) outputs[i] = wave[i - begin].get();
  }
  return outputs;
}

EvaluationRecord TaskEvaluator::evaluate(const PromptCandidate& prompt,
                                         std::span<const Example> examples) {
  EvaluationRecord record;
  record.prompt_id = prompt.id;
  record.metric = metric_;
  const auto outputs = raw_outputs(prompt.text, examples);
  std::vector<Prediction> predictions;
  std::vector<Label> golds;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    ExampleOutcome outcome;
    outcome.example_id = examples[i].id;
    outcome.raw_output = outputs[i];
    outcome.parsed = parse_label(outputs[i], label_space_);
    outcome.expected = examples[i].expected;
    outcome.correct = labels_match(outcome.parsed, outcome.expected);
    predictions.push_back(outcome.parsed);
    golds.push_back(outcome.expected);
    record.per_example.push_back(std::move(outcome));
  }
  if (!examples.empty()) {
    record.aggregate = score_metric(metric_, predictions, golds, label_space_);
  }
  return record;
}

}  // namespace ensprompt
