#include "ensprompt/ensemble/voting.hpp"

#include <cmath>
#include <map>

#include "ensprompt/core/labels.hpp"
#include "ensprompt/errors.hpp"

namespace ensprompt {

namespace {

struct Tally {
  double weight = 0.0;
  Label spelling;  // smallest raw spelling seen for this normalized label
};

}  // namespace

Prediction weighted_vote(std::span<const Prediction> predictions, std::span<const double> weights) {
  if (predictions.size() != weights.size()) {
    throw ContractViolation("weighted_vote: " + std::to_string(predictions.size()) +
                            " predictions vs " + std::to_string(weights.size()) + " weights");
  }
  std::map<std::string, Tally> tallies;
  double total = 0.0;
  for (std::size_t j = 0; j < predictions.size(); ++j) {
    total += std::abs(weights[j]);
    if (!predictions[j]) continue;
    auto [it, inserted] = tallies.try_emplace(normalize_label(*predictions[j]));
    it->second.weight += weights[j];
    if (inserted || *predictions[j] < it->second.spelling) it->second.spelling = *predictions[j];
  }
  if (tallies.empty()) return std::nullopt;

  const double tie_band = 1e-12 * std::max(total, 1e-300);
  // Map iteration is in ascending label order, so only a strictly larger
  // sum (beyond the tie band) can displace the current leader.
  auto best = tallies.begin();
  for (auto it = std::next(tallies.begin()); it != tallies.end(); ++it) {
    if (it->second.weight > best->second.weight + tie_band) best = it;
  }
  return best->second.spelling;
}

std::vector<Prediction> vote_rows(const PredictionMatrix& matrix, std::span<const double> weights) {
  matrix.validate();
  if (weights.size() != matrix.cols()) {
    throw ContractViolation("vote_rows: weight count does not match member count");
  }
  std::vector<Prediction> out;
  out.reserve(matrix.rows());
  for (const auto& row : matrix.cells) out.push_back(weighted_vote(row, weights));
  return out;
}

}  // namespace ensprompt
