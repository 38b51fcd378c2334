#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ensprompt/core/types.hpp"

namespace ensprompt {

struct EnsembleConfig {
  std::size_t members = 5;   // M
  double lambda = 1e-3;      // L2 penalty on the weights
  double min_weight = 0.05;  // w_min
  std::size_t random_starts = 8;

  // Throws ContractViolation when M < 1, lambda < 0, w_min <= 0 or M * w_min > 1.
  void validate() const;
  void validate_for(std::size_t member_count) const;
};

// Feasible set: sum(w) = 1 and every w_j >= min_weight.
bool is_feasible(std::span<const double> weights, double min_weight, double tolerance = 1e-9);

// Euclidean projection of `point` onto the feasible set.
std::vector<double> project_to_floored_simplex(std::span<const double> point, double min_weight);

// -macro_f1(vote(w)) + lambda * |w|^2
double weight_objective(const PredictionMatrix& matrix, std::span<const Label> golds,
                        std::span<const double> weights, double lambda,
                        const LabelSpace& label_space = {});

struct WeightFit {
  std::vector<double> weights;
  double objective = 0.0;
  double uniform_objective = 0.0;
  double macro_f1 = 0.0;
  std::size_t objective_evaluations = 0;
};

// Derivative-free minimization of weight_objective over the feasible set.
// Starts: uniform, one start leaning on each member, then `random_starts`
// seeded random points. From each start, a pattern search over +-e_i and
// e_i - e_j moves (projected back onto the feasible set) with the step
// halved whenever no move improves. The uniform start is evaluated first, so
// the result is never worse than uniform weights.
WeightFit fit_weights(const PredictionMatrix& matrix, std::span<const Label> golds,
                      const EnsembleConfig& config, std::uint64_t seed,
                      const LabelSpace& label_space = {});

inline std::vector<double> optimize_weights(const PredictionMatrix& matrix, std::span<const Label> golds,
                                            const EnsembleConfig& config, std::uint64_t seed,
                                            const LabelSpace& label_space = {}) {
  return fit_weights(matrix, golds, config, seed, label_space).weights;
}

}  // namespace ensprompt
