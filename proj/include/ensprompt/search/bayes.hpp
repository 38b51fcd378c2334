#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ensprompt/core/types.hpp"
#include "ensprompt/numerics/gpr.hpp"

namespace ensprompt {

struct AcquisitionConfig {
  double xi = 0.01;
  std::size_t budget = 4;  // N: how many candidates to pick

  void validate() const;
};

struct GprSettings {
  double noise = kGprDefaultNoise;
};

struct ScoredCandidate {
  PromptCandidate candidate;
  Posterior posterior;
  double expected_improvement = 0.0;
};

// EI for every candidate against a GP fitted on `history`. f* is the best
// history score (0 for an empty history). Sorted by EI descending, ties by
// candidate id ascending.
std::vector<ScoredCandidate> rank_by_expected_improvement(std::span<const PromptCandidate> candidates,
                                                          std::span<const GprPoint> history,
                                                          const AcquisitionConfig& config,
                                                          const GprSettings& gpr = {});

// Top-N of rank_by_expected_improvement. Every candidate must carry an
// embedding with the history's dimension.
std::vector<PromptCandidate> bayes_select(std::span<const PromptCandidate> candidates,
                                          std::span<const GprPoint> history,
                                          const AcquisitionConfig& config,
                                          const GprSettings& gpr = {});

}  // namespace ensprompt
