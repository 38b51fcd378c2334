#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ensprompt {

using Vector = std::vector<double>;

// Dense row-major matrix. Only what the GP and clustering code needs.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

// Lower-triangular L with L * L^T = a, or false if a is not numerically
// positive definite.
bool cholesky(const Matrix& a, Matrix& lower);

// Solve L x = b (forward) and L^T x = b (backward) for lower-triangular L.
Vector forward_substitute(const Matrix& lower, std::span<const double> b);
Vector backward_substitute_transposed(const Matrix& lower, std::span<const double> b);

}  // namespace ensprompt
