#pragma once

#include <span>
#include <vector>

#include "ensprompt/core/types.hpp"

namespace ensprompt {

// argmax over labels of the summed weights of the members voting for them.
// Labels are grouped by their normalized form; INVALID votes count for
// nothing. Sums within 1e-12 (relative to the total weight) are ties and go
// to the lexicographically smallest normalized label. All-INVALID -> INVALID.
Prediction weighted_vote(std::span<const Prediction> predictions, std::span<const double> weights);

// weighted_vote applied to every row of a prediction matrix.
std::vector<Prediction> vote_rows(const PredictionMatrix& matrix, std::span<const double> weights);

}  // namespace ensprompt
