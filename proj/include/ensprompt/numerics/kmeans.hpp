#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ensprompt/numerics/linalg.hpp"

namespace ensprompt {

struct Clustering {
  std::vector<Vector> centroids;
  std::vector<std::size_t> assignments;
  double inertia = 0.0;
  // Inertia after every assignment pass, in order.
  std::vector<double> inertia_trace;
  std::size_t iterations = 0;

  std::size_t k() const { return centroids.size(); }
};

// k-means++ seeding then Lloyd iterations until the assignment stops
// changing or max_iters passes are done. Uses min(k, #distinct points)
// clusters. A cluster that empties is re-seeded at the point farthest from
// its own centroid. Ties in nearest-centroid go to the lower index.
Clustering kmeans(std::span<const Vector> points, std::size_t k, std::uint64_t seed,
                  std::size_t max_iters = 100);

std::size_t count_distinct(std::span<const Vector> points);

}  // namespace ensprompt
