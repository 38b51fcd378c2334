#include "ensprompt/search/bandit.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "ensprompt/errors.hpp"
#include "ensprompt/numerics/kmeans.hpp"
#include "ensprompt/rng.hpp"
#include "ensprompt/search/acquisition.hpp"

namespace ensprompt {

void BanditConfig::validate() const {
  if (clusters < 1) throw ContractViolation("bandit K must be >= 1");
  if (top_arms < 1) throw ContractViolation("bandit top_arm_count must be >= 1");
  if (!(exploration >= 0.0)) throw ContractViolation("bandit exploration c must be >= 0");
}

BanditResult mab_select(std::span<const PromptCandidate> candidates, const BanditConfig& config,
                        const RewardFn& evaluate) {
  config.validate();
  BanditResult result;
  if (candidates.empty() || config.steps == 0) return result;

  std::vector<Vector> embeddings;
  embeddings.reserve(candidates.size());
  for (const auto& candidate : candidates) {
    if (!candidate.embedding) {
      throw ContractViolation("mab_select: candidate '" + candidate.id + "' has no embedding");
    }
    embeddings.push_back(*candidate.embedding);
  }

  Rng rng(config.seed);
  const Clustering clustering = kmeans(embeddings, config.clusters, rng.next());
  const std::size_t arm_count = clustering.k();

  std::vector<std::vector<std::size_t>> members(arm_count);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    members[clustering.assignments[i]].push_back(i);
  }
  // Drop arms left empty by clustering so every arm can be pulled.
  std::erase_if(members, [](const auto& m) { return m.empty(); });

  BanditState& state = result.state;
  for (const auto& arm : members) {
    std::vector<std::string> ids;
    for (auto index : arm) ids.push_back(candidates[index].id);
    state.arms.push_back(std::move(ids));
  }
  state.mean_reward.assign(members.size(), 0.0);
  state.pulls.assign(members.size(), 0);

  std::vector<std::vector<std::size_t>> unpulled = members;
  std::vector<double> reward_sum(candidates.size(), 0.0);
  std::vector<std::size_t> candidate_pulls(candidates.size(), 0);
  const std::size_t take = std::min(config.top_arms, members.size());

  for (std::size_t step = 1; step <= config.steps; ++step) {
    const std::size_t log_argument = config.log_mode == UcbLogMode::total_pulls
                                         ? std::max<std::size_t>(1, state.total_pulls)
                                         : step;
    std::vector<double> scores(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) {
      scores[k] = ucb_score(state.mean_reward[k], state.pulls[k], log_argument, config.exploration);
    }
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    for (std::size_t pick = 0; pick < take; ++pick) {
      const std::size_t arm = order[pick];
      std::size_t index = 0;
      if (!unpulled[arm].empty()) {
        const std::size_t slot = rng.index(unpulled[arm].size());
        index = unpulled[arm][slot];
        unpulled[arm].erase(unpulled[arm].begin() + static_cast<std::ptrdiff_t>(slot));
      } else {
        index = members[arm][rng.index(members[arm].size())];
      }
      const double reward = evaluate(candidates[index]);
      if (!(reward >= 0.0 && reward <= 1.0)) {
        throw ContractViolation("mab_select: reward outside [0, 1]");
      }
      reward_sum[index] += reward;
      ++candidate_pulls[index];
      ++state.pulls[arm];
      ++state.total_pulls;
      state.mean_reward[arm] += (reward - state.mean_reward[arm]) / static_cast<double>(state.pulls[arm]);
    }
  }

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidate_pulls[i] == 0) continue;
    result.selections.push_back(
        {candidates[i], reward_sum[i] / static_cast<double>(candidate_pulls[i]), candidate_pulls[i]});
  }
  std::sort(result.selections.begin(), result.selections.end(),
            [](const ObservedReward& a, const ObservedReward& b) {
              if (a.reward != b.reward) return a.reward > b.reward;
              return a.candidate.id < b.candidate.id;
            });
  return result;
}

}  // namespace ensprompt
