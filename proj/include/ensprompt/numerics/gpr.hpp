#pragma once

#include <span>
#include <vector>

#include "ensprompt/numerics/linalg.hpp"

namespace ensprompt {

// k(x, x') = signal_variance * exp(-|x - x'|^2 / (2 lengthscale^2))
struct RbfKernel {
  double lengthscale = 1.0;
  double signal_variance = 1.0;

  double operator()(std::span<const double> a, std::span<const double> b) const;
  void validate() const;  // both hyperparameters strictly positive
};

struct GprPoint {
  Vector x;
  double y = 0.0;
};

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

inline constexpr double kGprBaseJitter = 1e-9;
inline constexpr double kGprMaxJitter = 1e-3;
inline constexpr double kGprDefaultNoise = 1e-4;
inline constexpr double kSignalVarianceFloor = 1e-4;

class GprModel {
 public:
  // Fits on the given points. The prior mean is the mean of y (0 with no
  // data). Jitter starts at 1e-9 and grows x10 up to 1e-3 until the Cholesky
  // factorization succeeds; NumericError past that.
  static GprModel fit(std::span<const GprPoint> points, RbfKernel kernel, double noise);

  Posterior predict(std::span<const double> x) const;

  const RbfKernel& kernel() const { return kernel_; }
  double prior_mean() const { return prior_mean_; }
  double noise() const { return noise_; }
  double jitter() const { return jitter_; }
  std::size_t size() const { return inputs_.size(); }
  std::size_t dimension() const { return dimension_; }
  const Matrix& cholesky_factor() const { return chol_; }
  const Vector& alpha() const { return alpha_; }

 private:
  RbfKernel kernel_;
  std::vector<Vector> inputs_;
  Vector targets_;
  double noise_ = 0.0;
  double jitter_ = 0.0;
  double prior_mean_ = 0.0;
  std::size_t dimension_ = 0;
  Matrix chol_;
  Vector alpha_;
};

inline GprModel gpr_fit(std::span<const GprPoint> points, RbfKernel kernel, double noise) {
  return GprModel::fit(points, kernel, noise);
}

inline Posterior gpr_predict(const GprModel& model, std::span<const double> x) {
  return model.predict(x);
}

// Median of the positive pairwise distances between inputs (1.0 when there
// are fewer than two distinct inputs).
double median_heuristic_lengthscale(std::span<const GprPoint> points);

// Median-heuristic lengthscale and signal variance = var(y) floored at 1e-4.
RbfKernel default_kernel(std::span<const GprPoint> points);

}  // namespace ensprompt
