#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace extragrad {

using Vector = std::vector<double>;

/// Raised when an iterative routine hits its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix. Small (d <= a few hundred) by construction.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }

  Matrix transpose() const;

  /// y = A x through the active SIMD kernel.
  void apply(std::span<const double> x, std::span<double> y) const;
  /// y = A^T x through the active SIMD kernel.
  void apply_transpose(std::span<const double> x, std::span<double> y) const;
  Vector operator*(std::span<const double> x) const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, const Matrix& a);
  friend bool operator==(const Matrix&, const Matrix&) = default;

  double max_abs() const;
  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Vector helpers. Dimension mismatches throw std::invalid_argument.
double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double sq_norm(std::span<const double> a);
double sq_distance(std::span<const double> a, std::span<const double> b);
Vector subtract(std::span<const double> a, std::span<const double> b);
Vector add(std::span<const double> a, std::span<const double> b);
Vector scaled(double s, std::span<const double> a);
bool all_finite(std::span<const double> a);
void require_same_size(std::size_t a, std::size_t b, const char* what);

/// Solves A x = b by LU with partial pivoting. Throws std::domain_error if A is
/// numerically singular.
Vector lu_solve(const Matrix& a, std::span<const double> b);

struct PowerIterationOptions {
  double relative_tolerance = 1e-10;
  std::size_t max_iterations = 100000;
  unsigned long long seed = 0x5eedULL;
};

/// Largest singular value of A by power iteration on A^T A. Stops when the
/// eigen-residual of A^T A is below tolerance * estimate. Throws
/// ConvergenceError at the cap.
double largest_singular_value(const Matrix& a, const PowerIterationOptions& opts = {});

/// All singular values, descending, by one-sided Jacobi rotations.
Vector singular_values(const Matrix& a);

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns are eigenvectors
};

/// Cyclic Jacobi eigensolver for a symmetric matrix (symmetrised on input).
SymmetricEigen symmetric_eigen(const Matrix& s);

/// Maximum eigenvalue modulus of a general square matrix (n <= 64).
double spectral_radius(const Matrix& m);

}  // namespace extragrad
