#include "ensprompt/core/types.hpp"

#include <array>
#include <utility>

#include "ensprompt/core/labels.hpp"
#include "ensprompt/core/metrics.hpp"
#include "ensprompt/errors.hpp"

namespace ensprompt {

namespace {

constexpr std::array<std::pair<Metric, std::string_view>, 2> kMetricNames{{
    {Metric::macro_f1, "macro_f1"},
    {Metric::accuracy, "accuracy"},
}};

constexpr std::array<std::pair<Origin, std::string_view>, 5> kOriginNames{{
    {Origin::seed, "seed"},
    {Origin::bad_case_reflection, "bad_case_reflection"},
    {Origin::evolutionary_mutation, "evolutionary_mutation"},
    {Origin::evolutionary_zero_order, "evolutionary_zero_order"},
    {Origin::hard_case_tracking, "hard_case_tracking"},
}};

}  // namespace

std::string_view to_string(Metric metric) {
  for (const auto& [value, name] : kMetricNames) {
    if (value == metric) return name;
  }
  return "unknown";
}

std::string_view to_string(Origin origin) {
  for (const auto& [value, name] : kOriginNames) {
    if (value == origin) return name;
  }
  return "unknown";
}

Metric metric_from_string(std::string_view text) {
  for (const auto& [value, name] : kMetricNames) {
    if (name == text) return value;
  }
  throw ContractViolation("unknown metric '" + std::string(text) + "'");
}

Origin origin_from_string(std::string_view text) {
  for (const auto& [value, name] : kOriginNames) {
    if (name == text) return value;
  }
  throw ContractViolation("unknown candidate origin '" + std::string(text) + "'");
}

LabelSpace::LabelSpace(const std::vector<Label>& labels) {
  for (const auto& label : labels) {
    if (trim(label).empty()) {
      throw ContractViolation("label space contains an empty label");
    }
    auto [it, inserted] = by_normalized_.emplace(normalize_label(label), label);
    if (!inserted) {
      throw ContractViolation("labels '" + it->second + "' and '" + label +
                              "' collide after normalization");
    }
    labels_.push_back(label);
  }
}

std::optional<Label> LabelSpace::canonical(std::string_view text) const {
  auto it = by_normalized_.find(normalize_label(text));
  if (it == by_normalized_.end()) return std::nullopt;
  return it->second;
}

void Dataset::validate() const {
  if (examples.empty()) {
    throw ContractViolation("dataset has no examples");
  }
  std::map<std::string, bool> seen;
  for (const auto& example : examples) {
    if (trim(example.expected).empty()) {
      throw ContractViolation("example '" + example.id + "' has an empty expected label");
    }
    if (!seen.emplace(example.id, true).second) {
      throw ContractViolation("duplicate example id '" + example.id + "'");
    }
    if (!label_space.open() && !label_space.contains(example.expected)) {
      throw ContractViolation("example '" + example.id + "' expects '" + example.expected +
                              "', which is outside the label space");
    }
  }
}

std::vector<Label> Dataset::golds() const {
  std::vector<Label> out;
  out.reserve(examples.size());
  for (const auto& example : examples) out.push_back(example.expected);
  return out;
}

std::size_t EvaluationRecord::failure_count() const {
  std::size_t n = 0;
  for (const auto& outcome : per_example) {
    if (!outcome.correct) ++n;
  }
  return n;
}

double recompute_aggregate(const EvaluationRecord& record) {
  std::vector<Prediction> predictions;
  std::vector<Label> golds;
  for (const auto& outcome : record.per_example) {
    predictions.push_back(outcome.parsed);
    golds.push_back(outcome.expected);
  }
  return score_metric(record.metric, predictions, golds);
}

void PredictionMatrix::validate() const {
  if (cells.size() != example_ids.size()) {
    throw ContractViolation("prediction matrix: row count does not match example ids");
  }
  for (const auto& row : cells) {
    if (row.size() != member_ids.size()) {
      throw ContractViolation("prediction matrix: ragged row");
    }
  }
}

}  // namespace ensprompt
