#include "ensprompt/core/metrics.hpp"

#include <map>
#include <set>

#include "ensprompt/core/labels.hpp"
#include "ensprompt/errors.hpp"

namespace ensprompt {

namespace {

void check_lengths(std::size_t predictions, std::size_t golds, const char* what) {
  if (predictions != golds) {
    throw ContractViolation(std::string(what) + ": " + std::to_string(predictions) +
                            " predictions vs " + std::to_string(golds) + " golds");
  }
  if (golds == 0) {
    throw ContractViolation(std::string(what) + ": empty evaluation set");
  }
}

struct ClassCounts {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
};

}  // namespace

double macro_f1(std::span<const Prediction> predictions, std::span<const Label> golds,
                const LabelSpace& label_space) {
  check_lengths(predictions.size(), golds.size(), "macro_f1");
  std::map<std::string, ClassCounts> classes;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (!label_space.open() && !label_space.contains(golds[i])) {
      throw ContractViolation("macro_f1: gold '" + golds[i] + "' outside the label space");
    }
    const std::string gold = normalize_label(golds[i]);
    classes[gold];
    if (!predictions[i]) {
      ++classes[gold].false_negative;
      continue;
    }
    const std::string predicted = normalize_label(*predictions[i]);
    if (predicted == gold) {
      ++classes[gold].true_positive;
    } else {
      ++classes[gold].false_negative;
      ++classes[predicted].false_positive;
    }
  }
  double total = 0.0;
  for (const auto& [label, counts] : classes) {
    const double denominator =
        2.0 * counts.true_positive + counts.false_positive + counts.false_negative;
    if (denominator > 0.0) total += 2.0 * counts.true_positive / denominator;
  }
  return total / static_cast<double>(classes.size());
}

double accuracy(std::span<const Prediction> predictions, std::span<const Label> golds) {
  check_lengths(predictions.size(), golds.size(), "accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (labels_match(predictions[i], golds[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(golds.size());
}

double score_metric(Metric metric, std::span<const Prediction> predictions,
                    std::span<const Label> golds, const LabelSpace& label_space) {
  switch (metric) {
    case Metric::macro_f1:
      return macro_f1(predictions, golds, label_space);
    case Metric::accuracy:
      return accuracy(predictions, golds);
  }
  throw ContractViolation("score_metric: unknown metric");
}

}  // namespace ensprompt
