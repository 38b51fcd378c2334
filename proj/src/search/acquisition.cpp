#include "ensprompt/search/acquisition.hpp"

#include <cmath>
#include <numbers>

#include "ensprompt/errors.hpp"

namespace ensprompt {

double standard_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double sigma, double f_star, double xi) {
  if (!(sigma >= 0.0)) throw ContractViolation("expected_improvement: sigma must be >= 0");
  const double gain = mean - f_star - xi;
  if (sigma == 0.0) return std::max(gain, 0.0);
  const double z = gain / sigma;
  const double value = gain * standard_normal_cdf(z) + sigma * standard_normal_pdf(z);
  // The closed form can dip a hair below zero from cancellation far in the tail.
  return std::max(value, 0.0);
}

double ucb_score(double mean_reward, std::size_t pulls, std::size_t total_pulls, double c) {
  if (total_pulls < 1) throw ContractViolation("ucb_score: total pulls must be at least 1");
  if (pulls == 0) return kUcbForced;
  return mean_reward + c * std::sqrt(std::log(static_cast<double>(total_pulls)) /
                                     static_cast<double>(pulls));
}

}  // namespace ensprompt
