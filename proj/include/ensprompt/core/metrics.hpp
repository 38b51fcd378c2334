#pragma once

#include <span>

#include "ensprompt/core/types.hpp"

namespace ensprompt {

// Unweighted mean of per-class F1 over every class present in the golds or
// among the valid predictions. A class whose precision + recall is 0 scores 0.
// Throws ContractViolation on length mismatch, empty input, or (for a closed
// label space) a gold outside the space.
double macro_f1(std::span<const Prediction> predictions, std::span<const Label> golds,
                const LabelSpace& label_space = {});

// Fraction of predictions equal to their gold after normalization.
double accuracy(std::span<const Prediction> predictions, std::span<const Label> golds);

double score_metric(Metric metric, std::span<const Prediction> predictions,
                    std::span<const Label> golds, const LabelSpace& label_space = {});

}  // namespace ensprompt
