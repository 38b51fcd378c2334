#include "ensprompt/numerics/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ensprompt/errors.hpp"

namespace ensprompt {

double RbfKernel::operator()(std::span<const double> a, std::span<const double> b) const {
  return signal_variance * std::exp(-squared_distance(a, b) / (2.0 * lengthscale * lengthscale));
}

void RbfKernel::validate() const {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw ContractViolation("RBF lengthscale must be positive");
  }
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw ContractViolation("RBF signal variance must be positive");
  }
}

GprModel GprModel::fit(std::span<const GprPoint> points, RbfKernel kernel, double noise) {
  kernel.validate();
  if (!(noise >= 0.0)) throw ContractViolation("gpr_fit: noise must be >= 0");

  GprModel model;
  model.kernel_ = kernel;
  model.noise_ = noise;
  const std::size_t n = points.size();
  if (n == 0) return model;

  model.dimension_ = points.front().x.size();
  double sum = 0.0;
  for (const auto& point : points) {
    if (point.x.size() != model.dimension_) {
      throw ContractViolation("gpr_fit: inputs have differing dimensions");
    }
    if (!std::isfinite(point.y)) throw ContractViolation("gpr_fit: non-finite target");
    model.inputs_.push_back(point.x);
    model.targets_.push_back(point.y);
    sum += point.y;
  }
  model.prior_mean_ = sum / static_cast<double>(n);

  Matrix gram(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double value = kernel(model.inputs_[i], model.inputs_[j]);
      gram(i, j) = value;
      gram(j, i) = value;
    }
  }

  bool factored = false;
  for (double jitter = kGprBaseJitter; jitter <= kGprMaxJitter * (1.0 + 1e-9); jitter *= 10.0) {
    Matrix shifted = gram;
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) += noise + jitter;
    if (cholesky(shifted, model.chol_)) {
      model.jitter_ = jitter;
      factored = true;
      break;
    }
  }
  if (!factored) {
    throw NumericError("gpr_fit: kernel matrix is not positive definite even with jitter " +
                       std::to_string(kGprMaxJitter));
  }

  Vector centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = model.targets_[i] - model.prior_mean_;
  model.alpha_ = backward_substitute_transposed(model.chol_, forward_substitute(model.chol_, centered));
  return model;
}

Posterior GprModel::predict(std::span<const double> x) const {
  const double prior_variance = kernel_(x, x);
  if (inputs_.empty()) return {prior_mean_, prior_variance};
  if (x.size() != dimension_) {
    throw ContractViolation("gpr_predict: query has dimension " + std::to_string(x.size()) +
                            ", model expects " + std::to_string(dimension_));
  }
  Vector cross(inputs_.size());
  for (std::size_t i = 0; i < inputs_.size(); ++i) cross[i] = kernel_(inputs_[i], x);
  const double mean = prior_mean_ + dot(cross, alpha_);
  const Vector v = forward_substitute(chol_, cross);
  const double variance = std::clamp(prior_variance - dot(v, v), 0.0, prior_variance);
  return {mean, variance};
}

double median_heuristic_lengthscale(std::span<const GprPoint> points) {
  std::vector<double> distances;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = std::sqrt(squared_distance(points[i].x, points[j].x));
      if (d > 0.0) distances.push_back(d);
    }
  }
  if (distances.empty()) return 1.0;
  std::sort(distances.begin(), distances.end());
  const std::size_t mid = distances.size() / 2;
  if (distances.size() % 2 == 1) return distances[mid];
  return 0.5 * (distances[mid - 1] + distances[mid]);
}

RbfKernel default_kernel(std::span<const GprPoint> points) {
  RbfKernel kernel;
  kernel.lengthscale = median_heuristic_lengthscale(points);
  double variance = 0.0;
  if (!points.empty()) {
    double mean = 0.0;
    for (const auto& p : points) mean += p.y;
    mean /= static_cast<double>(points.size());
    for (const auto& p : points) variance += (p.y - mean) * (p.y - mean);
    variance /= static_cast<double>(points.size());
  }
  kernel.signal_variance = std::max(variance, kSignalVarianceFloor);
  return kernel;
}

}  // namespace ensprompt
