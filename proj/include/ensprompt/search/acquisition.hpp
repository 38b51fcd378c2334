#pragma once

#include <cstddef>
#include <limits>

namespace ensprompt {

double standard_normal_pdf(double z);
double standard_normal_cdf(double z);

// Closed-form E[max(f - f_star - xi, 0)] for f ~ N(mean, sigma^2).
// sigma == 0 degenerates to max(mean - f_star - xi, 0).
double expected_improvement(double mean, double sigma, double f_star, double xi);

// Score returned for an arm that has never been pulled. Sorts above every
// finite UCB value.
inline constexpr double kUcbForced = std::numeric_limits<double>::infinity();

inline bool is_forced(double ucb) { return ucb == kUcbForced; }

// mean_reward + c * sqrt(ln(total_pulls) / pulls), or kUcbForced when
// pulls == 0. total_pulls must be at least 1.
double ucb_score(double mean_reward, std::size_t pulls, std::size_t total_pulls, double c);

}  // namespace ensprompt
