#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ensprompt/core/types.hpp"

namespace ensprompt {

enum class UcbLogMode {
  total_pulls,  // ln N with N = evaluations so far (at least 1)
  step_index,   // ln t with t the 1-based time step
};

struct BanditConfig {
  std::size_t clusters = 5;        // K
  std::size_t steps = 4;           // T_s
  double exploration = 1.4142135623730951;  // c
  std::size_t top_arms = 3;        // |S_K|
  UcbLogMode log_mode = UcbLogMode::total_pulls;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BanditState {
  std::vector<std::vector<std::string>> arms;  // candidate ids per arm
  std::vector<double> mean_reward;
  std::vector<std::size_t> pulls;
  std::size_t total_pulls = 0;
};

struct ObservedReward {
  PromptCandidate candidate;
  double reward = 0.0;       // mean over this candidate's pulls
  std::size_t pulls = 0;
};

struct BanditResult {
  std::vector<ObservedReward> selections;  // reward descending, ties by id
  BanditState state;
};

// Reward in [0, 1] for one evaluation of a candidate.
using RewardFn = std::function<double(const PromptCandidate&)>;

// Clusters the candidates' embeddings into arms, then for each of the T_s
// steps pulls the top_arms arms by UCB (scores taken from a snapshot at the
// start of the step). Within an arm, candidates are drawn without
// replacement until the arm is exhausted, then with replacement.
BanditResult mab_select(std::span<const PromptCandidate> candidates, const BanditConfig& config,
                        const RewardFn& evaluate);

}  // namespace ensprompt
