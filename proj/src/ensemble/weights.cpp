#include "ensprompt/ensemble/weights.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ensprompt/core/labels.hpp"
#include "ensprompt/core/metrics.hpp"
#include "ensprompt/ensemble/voting.hpp"
#include "ensprompt/errors.hpp"
#include "ensprompt/rng.hpp"

namespace ensprompt {

namespace {

constexpr double kInitialStep = 0.25;
constexpr double kMinStep = 1e-6;
// Bounds zig-zagging along F1 region edges; typical starts converge in a few hundred sweeps.
constexpr std::size_t kMaxSweeps = 5000;
constexpr double kImprovement = 1e-15;

// Projection of `point` onto {x >= 0, sum(x) = mass}.
std::vector<double> project_to_simplex(std::span<const double> point, double mass) {
  const std::size_t n = point.size();
  std::vector<double> sorted(point.begin(), point.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - mass) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(point[i] - theta, 0.0);
  return out;
}

// weight_objective over labels encoded once as ids in ascending normalized
// order, which keeps vote tie-breaks and summation order identical.
class Objective {
 public:
  Objective(const PredictionMatrix& matrix, std::span<const Label> golds, double lambda,
            const LabelSpace& label_space)
      : lambda_(lambda), members_(matrix.cols()) {
    (void)macro_f1(std::vector<Prediction>(golds.size()), golds, label_space);  // gold validation
    std::map<std::string, int> ids;
    for (const auto& gold : golds) ids.emplace(normalize_label(gold), 0);
    for (const auto& row : matrix.cells) {
      for (const auto& cell : row) {
        if (cell) ids.emplace(normalize_label(*cell), 0);
      }
    }
    int next = 0;
    for (auto& [label, id] : ids) id = next++;
    classes_ = next;
    for (const auto& gold : golds) golds_.push_back(ids.at(normalize_label(gold)));
    for (const auto& row : matrix.cells) {
      for (const auto& cell : row) cells_.push_back(cell ? ids.at(normalize_label(*cell)) : -1);
    }
  }

  double operator()(std::span<const double> weights) {
    ++evaluations;
    double total = 0.0;
    double norm = 0.0;
    for (double w : weights) {
      total += std::abs(w);
      norm += w * w;
    }
    const double tie_band = 1e-12 * std::max(total, 1e-300);
    std::vector<double> tally(classes_);
    std::vector<char> seen(classes_);
    std::vector<int> tp(classes_), fp(classes_), fn(classes_);
    std::vector<char> present(classes_);
    for (std::size_t i = 0; i < golds_.size(); ++i) {
      std::fill(tally.begin(), tally.end(), 0.0);
      std::fill(seen.begin(), seen.end(), 0);
      for (std::size_t j = 0; j < members_; ++j) {
        const int id = cells_[i * members_ + j];
        if (id < 0) continue;
        tally[id] += weights[j];
        seen[id] = 1;
      }
      int winner = -1;
      for (int c = 0; c < classes_; ++c) {
        if (seen[c] && (winner < 0 || tally[c] > tally[winner] + tie_band)) winner = c;
      }
      const int gold = golds_[i];
      present[gold] = 1;
      if (winner == gold) {
        ++tp[gold];
      } else {
        ++fn[gold];
        if (winner >= 0) {
          ++fp[winner];
          present[winner] = 1;
        }
      }
    }
    double sum = 0.0;
    int count = 0;
    for (int c = 0; c < classes_; ++c) {
      if (!present[c]) continue;
      ++count;
      const double denominator = 2.0 * tp[c] + fp[c] + fn[c];
      if (denominator > 0.0) sum += 2.0 * tp[c] / denominator;
    }
    return -sum / static_cast<double>(count) + lambda_ * norm;
  }

  std::size_t evaluations = 0;

 private:
  double lambda_;
  std::size_t members_;
  int classes_ = 0;
  std::vector<int> golds_;
  std::vector<int> cells_;  // row-major, -1 for INVALID
};

struct Point {
  std::vector<double> weights;
  double value = 0.0;
};

Point pattern_search(std::vector<double> start, double min_weight, Objective& objective) {
  const std::size_t m = start.size();
  Point current{project_to_floored_simplex(start, min_weight), 0.0};
  current.value = objective(current.weights);

  std::vector<std::vector<double>> directions;
  for (std::size_t i = 0; i < m; ++i) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> d(m, 0.0);
      d[i] = sign;
      directions.push_back(std::move(d));
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      std::vector<double> d(m, 0.0);
      d[i] = 1.0;
      d[j] = -1.0;
      directions.push_back(std::move(d));
    }
  }

  std::vector<double> trial(m);
  std::size_t sweeps = 0;
  for (double step = kInitialStep; step >= kMinStep && sweeps < kMaxSweeps; ++sweeps) {
    bool improved = false;
    for (const auto& direction : directions) {
      for (std::size_t k = 0; k < m; ++k) trial[k] = current.weights[k] + step * direction[k];
      auto projected = project_to_floored_simplex(trial, min_weight);
      const double value = objective(projected);
      if (value < current.value - kImprovement) {
        current.weights = std::move(projected);
        current.value = value;
        improved = true;
      }
    }
    // Grow after success so long regularizer slides do not crawl at tiny steps.
    step = improved ? std::min(2.0 * step, kInitialStep) : 0.5 * step;
  }
  return current;
}

}  // namespace

void EnsembleConfig::validate() const {
  if (members < 1) throw ContractViolation("ensemble M must be >= 1");
  if (!(lambda >= 0.0)) throw ContractViolation("ensemble lambda must be >= 0");
  if (!(min_weight > 0.0)) throw ContractViolation("ensemble w_min must be > 0");
  validate_for(members);
}

void EnsembleConfig::validate_for(std::size_t member_count) const {
  if (static_cast<double>(member_count) * min_weight > 1.0 + 1e-12) {
    throw ContractViolation("ensemble is infeasible: " + std::to_string(member_count) + " * w_min = " +
                            std::to_string(static_cast<double>(member_count) * min_weight) + " > 1");
  }
}

bool is_feasible(std::span<const double> weights, double min_weight, double tolerance) {
  if (weights.empty()) return false;
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= min_weight)) return false;
    sum += w;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

std::vector<double> project_to_floored_simplex(std::span<const double> point, double min_weight) {
  const std::size_t m = point.size();
  if (m == 0) throw ContractViolation("project_to_floored_simplex: empty point");
  const double mass = 1.0 - static_cast<double>(m) * min_weight;
  if (mass < -1e-12) throw ContractViolation("project_to_floored_simplex: M * w_min > 1");
  std::vector<double> shifted(m);
  for (std::size_t i = 0; i < m; ++i) shifted[i] = point[i] - min_weight;
  std::vector<double> out = project_to_simplex(shifted, std::max(mass, 0.0));
  for (double& w : out) w += min_weight;
  return out;
}

double weight_objective(const PredictionMatrix& matrix, std::span<const Label> golds,
                        std::span<const double> weights, double lambda, const LabelSpace& label_space) {
  const auto votes = vote_rows(matrix, weights);
  double norm = 0.0;
  for (double w : weights) norm += w * w;
  return -macro_f1(votes, golds, label_space) + lambda * norm;
}

WeightFit fit_weights(const PredictionMatrix& matrix, std::span<const Label> golds,
                      const EnsembleConfig& config, std::uint64_t seed, const LabelSpace& label_space) {
  matrix.validate();
  const std::size_t m = matrix.cols();
  if (m == 0) throw ContractViolation("optimize_weights: matrix has no members");
  if (matrix.rows() != golds.size()) {
    throw ContractViolation("optimize_weights: matrix rows do not match gold count");
  }
  if (!(config.lambda >= 0.0)) throw ContractViolation("ensemble lambda must be >= 0");
  if (!(config.min_weight > 0.0)) throw ContractViolation("ensemble w_min must be > 0");
  config.validate_for(m);

  Objective objective(matrix, golds, config.lambda, label_space);
  WeightFit fit;
  const std::vector<double> uniform(m, 1.0 / static_cast<double>(m));
  fit.uniform_objective = objective(uniform);
  if (m == 1) {
    fit.weights = {1.0};
    fit.objective = fit.uniform_objective;
  } else {
    std::vector<std::vector<double>> starts{uniform};
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> lean(m, config.min_weight);
      lean[j] = 1.0 - static_cast<double>(m - 1) * config.min_weight;
      starts.push_back(std::move(lean));
    }
    Rng rng(seed);
    for (std::size_t r = 0; r < config.random_starts; ++r) {
      std::vector<double> draw(m);
      double total = 0.0;
      for (auto& x : draw) {
        x = -std::log(1.0 - rng.uniform());
        total += x;
      }
      const double mass = 1.0 - static_cast<double>(m) * config.min_weight;
      for (auto& x : draw) x = config.min_weight + mass * x / total;
      starts.push_back(std::move(draw));
    }

    fit.weights = uniform;
    fit.objective = fit.uniform_objective;
    for (auto& start : starts) {
      Point local = pattern_search(std::move(start), config.min_weight, objective);
      if (local.value < fit.objective - kImprovement) {
        fit.weights = std::move(local.weights);
        fit.objective = local.value;
      }
    }
  }
  fit.macro_f1 = macro_f1(vote_rows(matrix, fit.weights), golds, label_space);
  fit.objective_evaluations = objective.evaluations;
  return fit;
}

}  // namespace ensprompt
