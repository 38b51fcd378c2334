#include "ensprompt/numerics/kmeans.hpp"

#include <algorithm>
#include <limits>

#include "ensprompt/errors.hpp"
#include "ensprompt/rng.hpp"

namespace ensprompt {

namespace {

std::size_t nearest(std::span<const double> point, const std::vector<Vector>& centroids,
                    double* distance_out) {
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(point, centroids[c]);
    if (d < best_distance) {
      best_distance = d;
      best = c;
    }
  }
  if (distance_out != nullptr) *distance_out = best_distance;
  return best;
}

double assign(std::span<const Vector> points, const std::vector<Vector>& centroids,
              std::vector<std::size_t>& assignments) {
  double inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double d = 0.0;
    assignments[i] = nearest(points[i], centroids, &d);
    inertia += d;
  }
  return inertia;
}

std::vector<Vector> seed_plus_plus(std::span<const Vector> points, std::size_t k, Rng& rng) {
  std::vector<Vector> centroids;
  centroids.push_back(points[rng.index(points.size())]);
  std::vector<double> weights(points.size());
  while (centroids.size() < k) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      double d = 0.0;
      nearest(points[i], centroids, &d);
      weights[i] = d;
    }
    centroids.push_back(points[rng.weighted_index(weights)]);
  }
  return centroids;
}

}  // namespace

std::size_t count_distinct(std::span<const Vector> points) {
  std::vector<Vector> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

Clustering kmeans(std::span<const Vector> points, std::size_t k, std::uint64_t seed,
                  std::size_t max_iters) {
  if (points.empty()) throw ContractViolation("kmeans: no points");
  if (k == 0) throw ContractViolation("kmeans: k must be at least 1");
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw ContractViolation("kmeans: points have differing dimensions");
  }
  const std::size_t clusters = std::min(k, count_distinct(points));

  Rng rng(seed);
  Clustering result;
  result.centroids = seed_plus_plus(points, clusters, rng);
  result.assignments.assign(points.size(), 0);
  result.inertia = assign(points, result.centroids, result.assignments);
  result.inertia_trace.push_back(result.inertia);

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    result.iterations = iter + 1;
    // Update step.
    std::vector<Vector> sums(clusters, Vector(dim, 0.0));
    std::vector<std::size_t> sizes(clusters, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& sum = sums[result.assignments[i]];
      for (std::size_t d = 0; d < dim; ++d) sum[d] += points[i][d];
      ++sizes[result.assignments[i]];
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      if (sizes[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        result.centroids[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
      }
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      if (sizes[c] != 0) continue;
      // Steal the point that is worst served by its own centroid.
      std::size_t farthest = 0;
      double farthest_distance = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (sizes[result.assignments[i]] <= 1) continue;
        const double d = squared_distance(points[i], result.centroids[result.assignments[i]]);
        if (d > farthest_distance) {
          farthest_distance = d;
          farthest = i;
        }
      }
      if (farthest_distance < 0.0) break;
      --sizes[result.assignments[farthest]];
      result.assignments[farthest] = c;
      sizes[c] = 1;
      result.centroids[c] = points[farthest];
    }

    // Assignment step.
    std::vector<std::size_t> next(points.size());
    const double inertia = assign(points, result.centroids, next);
    result.inertia_trace.push_back(inertia);
    result.inertia = inertia;
    const bool stable = next == result.assignments;
    result.assignments = std::move(next);
    if (stable) break;
  }
  return result;
}

}  // namespace ensprompt
