#include "ensprompt/search/bayes.hpp"

#include <algorithm>
#include <cmath>

#include "ensprompt/errors.hpp"
#include "ensprompt/search/acquisition.hpp"

namespace ensprompt {

void AcquisitionConfig::validate() const {
  if (!(xi >= 0.0)) throw ContractViolation("acquisition xi must be >= 0");
  if (budget < 1) throw ContractViolation("acquisition budget N must be >= 1");
}

std::vector<ScoredCandidate> rank_by_expected_improvement(std::span<const PromptCandidate> candidates,
                                                          std::span<const GprPoint> history,
                                                          const AcquisitionConfig& config,
                                                          const GprSettings& gpr) {
  config.validate();
  std::vector<ScoredCandidate> scored;
  if (candidates.empty()) return scored;

  const GprModel model = GprModel::fit(history, default_kernel(history), gpr.noise);
  double f_star = 0.0;
  if (!history.empty()) {
    f_star = std::max_element(history.begin(), history.end(), [](const auto& a, const auto& b) {
               return a.y < b.y;
             })->y;
  }

  scored.reserve(candidates.size());
  for (const auto& candidate : candidates) {
    if (!candidate.embedding) {
      throw ContractViolation("bayes_select: candidate '" + candidate.id + "' has no embedding");
    }
    ScoredCandidate entry{candidate, model.predict(*candidate.embedding), 0.0};
    entry.expected_improvement =
        expected_improvement(entry.posterior.mean, std::sqrt(entry.posterior.variance), f_star, config.xi);
    scored.push_back(std::move(entry));
  }
  std::sort(scored.begin(), scored.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.expected_improvement != b.expected_improvement) {
      return a.expected_improvement > b.expected_improvement;
    }
    return a.candidate.id < b.candidate.id;
  });
  return scored;
}

std::vector<PromptCandidate> bayes_select(std::span<const PromptCandidate> candidates,
                                          std::span<const GprPoint> history,
                                          const AcquisitionConfig& config, const GprSettings& gpr) {
  auto ranked = rank_by_expected_improvement(candidates, history, config, gpr);
  std::vector<PromptCandidate> out;
  for (std::size_t i = 0; i < ranked.size() && i < config.budget; ++i) {
    out.push_back(std::move(ranked[i].candidate));
  }
  return out;
}

}  // namespace ensprompt
