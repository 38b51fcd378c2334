#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ensprompt {

using Label = std::string;

// A parsed model answer. std::nullopt is the INVALID sentinel: the output
// could not be parsed and is always scored incorrect.
using Prediction = std::optional<Label>;

inline constexpr std::string_view kInvalidDisplay = "INVALID";

enum class Metric { macro_f1, accuracy };

enum class Origin {
  seed,
  bad_case_reflection,
  evolutionary_mutation,
  evolutionary_zero_order,
  hard_case_tracking,
};

std::string_view to_string(Metric metric);
std::string_view to_string(Origin origin);
Metric metric_from_string(std::string_view text);
Origin origin_from_string(std::string_view text);

struct Example {
  std::string id;
  std::string input;
  Label expected;
};

// Closed label spaces map every accepted spelling (after normalization) onto
// one canonical label. An empty space means open-ended answers.
class LabelSpace {
 public:
  LabelSpace() = default;
  explicit LabelSpace(const std::vector<Label>& labels);

  bool open() const { return labels_.empty(); }
  const std::vector<Label>& labels() const { return labels_; }

  // Canonical label whose normalized form equals normalize_label(text).
  std::optional<Label> canonical(std::string_view text) const;
  bool contains(std::string_view text) const { return canonical(text).has_value(); }

  bool operator==(const LabelSpace& other) const { return labels_ == other.labels_; }

 private:
  std::vector<Label> labels_;
  std::map<std::string, Label> by_normalized_;
};

struct Dataset {
  std::vector<Example> examples;
  LabelSpace label_space;
  Metric metric = Metric::macro_f1;

  // Throws ContractViolation naming the first offending example.
  void validate() const;
  std::vector<Label> golds() const;
};

struct PromptCandidate {
  std::string id;
  std::string text;
  Origin origin = Origin::seed;
  std::optional<std::vector<double>> embedding;
  std::optional<double> score;

  bool evaluated() const { return score.has_value(); }
};

struct ExampleOutcome {
  std::string example_id;
  std::string raw_output;
  Prediction parsed;
  Label expected;
  bool correct = false;
};

struct EvaluationRecord {
  std::string prompt_id;
  std::vector<ExampleOutcome> per_example;
  double aggregate = 0.0;
  Metric metric = Metric::macro_f1;

  std::size_t failure_count() const;
};

// Recompute the aggregate metric from per-example entries.
double recompute_aggregate(const EvaluationRecord& record);

// Dense example x member table of parsed predictions.
struct PredictionMatrix {
  std::vector<std::string> example_ids;
  std::vector<std::string> member_ids;
  std::vector<std::vector<Prediction>> cells;  // cells[row][member]

  std::size_t rows() const { return example_ids.size(); }
  std::size_t cols() const { return member_ids.size(); }
  // Throws ContractViolation unless every (row, member) cell exists.
  void validate() const;
};

}  // namespace ensprompt
