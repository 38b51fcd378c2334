#include <doctest.h>

#include <cmath>
#include <random>

#include "ensprompt/errors.hpp"
#include "ensprompt/numerics/gpr.hpp"
#include "ensprompt/numerics/kmeans.hpp"
#include "ensprompt/numerics/linalg.hpp"
#include "oracles.hpp"

using namespace ensprompt;

namespace {

double inertia_of(const std::vector<Vector>& points, const std::vector<std::size_t>& assignment, std::size_t k) {
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    Vector mean(points[0].size(), 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (assignment[i] != c) continue;
      for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += points[i][d];
      ++n;
    }
    if (n == 0) continue;
    for (double& x : mean) x /= n;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (assignment[i] == c) total += squared_distance(points[i], mean);
    }
  }
  return total;
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("cholesky and triangular solves") {
  Matrix a(2, 2);
  a(0, 0) = 4;
  a(0, 1) = a(1, 0) = 2;
  a(1, 1) = 3;
  Matrix l;
  REQUIRE(cholesky(a, l));
  CHECK(l(0, 0) == doctest::Approx(2.0));
  CHECK(l(1, 0) == doctest::Approx(1.0));
  CHECK(l(1, 1) == doctest::Approx(std::sqrt(2.0)));
  const std::vector<double> b{2.0, 5.0};
  const auto y = forward_substitute(l, b);
  const auto x = backward_substitute_transposed(l, y);
  CHECK(4 * x[0] + 2 * x[1] == doctest::Approx(2.0));
  CHECK(2 * x[0] + 3 * x[1] == doctest::Approx(5.0));
  Matrix bad(2, 2);
  bad(0, 0) = 1;
  bad(0, 1) = bad(1, 0) = 2;
  bad(1, 1) = 1;
  CHECK_FALSE(cholesky(bad, l));
}

TEST_CASE("gpr with no data is the prior") {
  const GprModel model = gpr_fit({}, RbfKernel{1.0, 2.5}, 1e-4);
  for (double x : {-3.0, 0.0, 7.0}) {
    const auto p = gpr_predict(model, std::vector<double>{x});
    CHECK(p.mean == 0.0);
    CHECK(p.variance == doctest::Approx(2.5));
  }
}

TEST_CASE("gpr interpolates a single training point") {
  const std::vector<GprPoint> points{{{0.3, -1.0}, 0.8}};
  const GprModel model = gpr_fit(points, RbfKernel{1.0, 1.0}, 1e-9);
  const auto p = gpr_predict(model, points[0].x);
  CHECK(std::abs(p.mean - 0.8) <= 1e-5);
  CHECK(p.variance <= 1e-6);
}

TEST_CASE("gpr 2-point posterior matches the 2x2 solve") {
  const std::vector<GprPoint> points{{{0.0}, 0.0}, {{1.0}, 1.0}};
  const GprModel model = gpr_fit(points, RbfKernel{1.0, 1.0}, 1e-6);
  for (double xs : {0.5, 0.1, -0.7, 1.9}) {
    const auto p = gpr_predict(model, std::vector<double>{xs});
    const auto o = oracle::gp_two_points(0, 0, 1, 1, 1.0, 1.0, 1e-6 + model.jitter(), xs);
    CHECK(std::abs(p.mean - o.mean) <= 1e-9);
    CHECK(std::abs(p.variance - o.variance) <= 1e-9);
  }
}

TEST_CASE("gpr decays to the prior far from data") {
  const std::vector<GprPoint> points{{{0.0, 0.0}, 0.2}, {{0.5, 0.1}, 0.6}, {{0.2, 0.9}, 0.4}};
  const RbfKernel kernel{0.5, 0.3};
  const GprModel model = gpr_fit(points, kernel, 1e-4);
  const auto p = gpr_predict(model, std::vector<double>{50.0, -50.0});
  CHECK(std::abs(p.mean - model.prior_mean()) <= 1e-6);
  CHECK(model.prior_mean() == doctest::Approx(0.4));
  CHECK(std::abs(p.variance - 0.3) <= 1e-6);
}

TEST_CASE("gpr variance stays inside [0, signal variance]") {
  std::mt19937_64 engine(3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<GprPoint> points;
  for (int i = 0; i < 12; ++i) points.push_back({{unit(engine), unit(engine), unit(engine)}, unit(engine)});
  points.push_back(points[0]);  // duplicate input stresses the jitter path
  const RbfKernel kernel = default_kernel(points);
  const GprModel model = gpr_fit(points, kernel, 1e-9);
  for (int q = 0; q < 500; ++q) {
    const auto p = gpr_predict(model, std::vector<double>{unit(engine), unit(engine), unit(engine)});
    CHECK(p.variance >= 0.0);
    CHECK(p.variance <= kernel.signal_variance + 1e-9);
  }
}

TEST_CASE("gpr contract violations") {
  const std::vector<GprPoint> mixed{{{0.0}, 0.1}, {{0.0, 1.0}, 0.2}};
  CHECK_THROWS_AS(gpr_fit(mixed, RbfKernel{}, 1e-4), ContractViolation);
  const std::vector<GprPoint> one{{{0.0}, 0.1}};
  const GprModel model = gpr_fit(one, RbfKernel{}, 1e-4);
  CHECK_THROWS_AS(gpr_predict(model, std::vector<double>{0.0, 1.0}), ContractViolation);
  CHECK_THROWS_AS(gpr_fit(one, RbfKernel{0.0, 1.0}, 1e-4), ContractViolation);
  CHECK_THROWS_AS(gpr_fit(one, RbfKernel{}, -1.0), ContractViolation);
}

TEST_CASE("kernel defaults follow the median heuristic") {
  const std::vector<GprPoint> points{{{0.0}, 0.0}, {{1.0}, 1.0}, {{3.0}, 0.5}};
  // Pairwise distances 1, 3, 2 -> median 2.
  CHECK(median_heuristic_lengthscale(points) == doctest::Approx(2.0));
  const auto kernel = default_kernel(points);
  CHECK(kernel.signal_variance == doctest::Approx(1.0 / 6.0));
  const std::vector<GprPoint> flat{{{0.0}, 0.5}, {{0.0}, 0.5}};
  CHECK(median_heuristic_lengthscale(flat) == 1.0);
  CHECK(default_kernel(flat).signal_variance == kSignalVarianceFloor);
}

TEST_CASE("kmeans with one cluster is the mean") {
  const std::vector<Vector> points{{0, 0}, {2, 0}, {4, 3}, {2, 1}};
  const auto c = kmeans(points, 1, 5);
  REQUIRE(c.k() == 1);
  CHECK(c.centroids[0][0] == doctest::Approx(2.0));
  CHECK(c.centroids[0][1] == doctest::Approx(1.0));
  // Squared distances to the mean (2, 1).
  CHECK(c.inertia == doctest::Approx(5.0 + 1.0 + 8.0 + 0.0));
}

TEST_CASE("kmeans with k = distinct points has zero inertia") {
  const std::vector<Vector> points{{0, 0}, {1, 0}, {0, 1}, {1, 0}};
  const auto c = kmeans(points, 3, 9);
  CHECK(c.k() == 3);
  CHECK(c.inertia == doctest::Approx(0.0));
  CHECK(count_distinct(points) == 3);
  CHECK(kmeans(points, 10, 9).k() == 3);
}

TEST_CASE("kmeans recovers two separated blobs") {
  const std::vector<Vector> points{{0.0, 0.0}, {0.03, 0.02}, {0.01, 0.05}, {12.0, 11.0}, {12.04, 11.02}, {11.98, 11.05}};
  // Oracle: enumerate every 2-partition and keep the minimum inertia.
  double best = 1e300;
  std::vector<std::size_t> best_assignment;
  for (unsigned mask = 1; mask < (1u << points.size()) - 1; ++mask) {
    std::vector<std::size_t> a(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) a[i] = (mask >> i) & 1u;
    const double v = inertia_of(points, a, 2);
    if (v < best) {
      best = v;
      best_assignment = a;
    }
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = kmeans(points, 2, seed);
    CHECK(c.inertia == doctest::Approx(best).epsilon(1e-9));
    for (std::size_t i = 0; i < points.size(); ++i) {
      CHECK((c.assignments[i] == c.assignments[0]) == (best_assignment[i] == best_assignment[0]));
    }
  }
}

TEST_CASE("kmeans inertia is non-increasing and assignments are nearest") {
  std::mt19937_64 engine(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> points;
  for (int i = 0; i < 60; ++i) points.push_back({normal(engine), normal(engine), normal(engine)});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto c = kmeans(points, 4, seed);
    for (std::size_t t = 1; t < c.inertia_trace.size(); ++t) CHECK(c.inertia_trace[t] <= c.inertia_trace[t - 1] + 1e-12);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double own = squared_distance(points[i], c.centroids[c.assignments[i]]);
      for (const auto& centroid : c.centroids) CHECK(own <= squared_distance(points[i], centroid) + 1e-12);
    }
    const auto again = kmeans(points, 4, seed);
    CHECK(again.assignments == c.assignments);
  }
}

}
