#include "ensprompt/core/serialization.hpp"

namespace ensprompt {

using nlohmann::json;

json prediction_to_json(const Prediction& prediction) {
  return prediction ? json(*prediction) : json(nullptr);
}

Prediction prediction_from_json(const json& value) {
  if (value.is_null()) return std::nullopt;
  return value.get<std::string>();
}

void to_json(json& out, const PromptCandidate& candidate) {
  out = json{{"id", candidate.id}, {"text", candidate.text}, {"origin", to_string(candidate.origin)}};
  out["embedding"] = candidate.embedding ? json(*candidate.embedding) : json(nullptr);
  out["score"] = candidate.score ? json(*candidate.score) : json(nullptr);
}

void from_json(const json& in, PromptCandidate& candidate) {
  candidate.id = in.at("id").get<std::string>();
  candidate.text = in.at("text").get<std::string>();
  candidate.origin = origin_from_string(in.at("origin").get<std::string>());
  candidate.embedding.reset();
  candidate.score.reset();
  if (in.contains("embedding") && !in["embedding"].is_null()) {
    candidate.embedding = in["embedding"].get<std::vector<double>>();
  }
  if (in.contains("score") && !in["score"].is_null()) {
    candidate.score = in["score"].get<double>();
  }
}

void to_json(json& out, const Example& example) {
  out = json{{"id", example.id}, {"input", example.input}, {"expected", example.expected}};
}

void from_json(const json& in, Example& example) {
  example.id = in.at("id").get<std::string>();
  example.input = in.at("input").get<std::string>();
  example.expected = in.at("expected").get<std::string>();
}

void to_json(json& out, const EvaluationRecord& record) {
  json rows = json::array();
  for (const auto& outcome : record.per_example) {
    rows.push_back({{"example_id", outcome.example_id},
                    {"raw_output", outcome.raw_output},
                    {"parsed", prediction_to_json(outcome.parsed)},
                    {"expected", outcome.expected},
                    {"correct", outcome.correct}});
  }
  out = json{{"prompt_id", record.prompt_id},
             {"metric", to_string(record.metric)},
             {"aggregate", record.aggregate},
             {"per_example", std::move(rows)}};
}

void from_json(const json& in, EvaluationRecord& record) {
  record.prompt_id = in.at("prompt_id").get<std::string>();
  record.metric = metric_from_string(in.at("metric").get<std::string>());
  record.aggregate = in.at("aggregate").get<double>();
  record.per_example.clear();
  for (const auto& row : in.at("per_example")) {
    ExampleOutcome outcome;
    outcome.example_id = row.at("example_id").get<std::string>();
    outcome.raw_output = row.at("raw_output").get<std::string>();
    outcome.parsed = prediction_from_json(row.at("parsed"));
    outcome.expected = row.at("expected").get<std::string>();
    outcome.correct = row.at("correct").get<bool>();
    record.per_example.push_back(std::move(outcome));
  }
}

}  // namespace ensprompt
