#include "ensprompt/numerics/linalg.hpp"

#include <cmath>

#include "ensprompt/errors.hpp"

namespace ensprompt {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractViolation("dot: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractViolation("squared_distance: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

bool cholesky(const Matrix& a, Matrix& lower) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw ContractViolation("cholesky: matrix is not square");
  lower = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diagonal = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diagonal -= lower(j, k) * lower(j, k);
    if (!(diagonal > 0.0) || !std::isfinite(diagonal)) return false;
    const double pivot = std::sqrt(diagonal);
    lower(j, j) = pivot;
    for (std::size_t i = j + 1; i < n; ++i) {
      double value = a(i, j);
      for (std::size_t k = 0; k < j; ++k) value -= lower(i, k) * lower(j, k);
      lower(i, j) = value / pivot;
    }
  }
  return true;
}

Vector forward_substitute(const Matrix& lower, std::span<const double> b) {
  const std::size_t n = lower.rows();
  if (b.size() != n) throw ContractViolation("forward_substitute: size mismatch");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double value = b[i];
    for (std::size_t k = 0; k < i; ++k) value -= lower(i, k) * x[k];
    x[i] = value / lower(i, i);
  }
  return x;
}

Vector backward_substitute_transposed(const Matrix& lower, std::span<const double> b) {
  const std::size_t n = lower.rows();
  if (b.size() != n) throw ContractViolation("backward_substitute: size mismatch");
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double value = b[i];
    for (std::size_t k = i + 1; k < n; ++k) value -= lower(k, i) * x[k];
    x[i] = value / lower(i, i);
  }
  return x;
}

}  // namespace ensprompt
