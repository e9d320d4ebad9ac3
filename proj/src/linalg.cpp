#include "extragrad/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "extragrad/kernels.hpp"

namespace extragrad {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument(
        fmt::format("matrix data has {} entries, expected {}x{}", data_.size(), rows, cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

void Matrix::apply(std::span<const double> x, std::span<double> y) const {
  require_same_size(x.size(), cols_, "matrix-vector product (input)");
  require_same_size(y.size(), rows_, "matrix-vector product (output)");
  kernels::active().gemv(data_.data(), rows_, cols_, x.data(), y.data());
}

void Matrix::apply_transpose(std::span<const double> x, std::span<double> y) const {
  require_same_size(x.size(), rows_, "transposed product (input)");
  require_same_size(y.size(), cols_, "transposed product (output)");
  kernels::active().gemv_t(data_.data(), rows_, cols_, x.data(), y.data());
}

Vector Matrix::operator*(std::span<const double> x) const {
  Vector y(rows_);
  apply(x, y);
  return y;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  require_same_size(a.cols(), b.rows(), "matrix product");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_size(a.rows(), b.rows(), "matrix sum");
  require_same_size(a.cols(), b.cols(), "matrix sum");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] += b.data_[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) { return a + (-1.0) * b; }

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data_) v *= s;
  return c;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool Matrix::all_finite() const { return extragrad::all_finite(data_); }

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(fmt::format("dimension mismatch in {}: {} vs {}", what, a, b));
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  return kernels::dot(a, b);
}

double sq_norm(std::span<const double> a) { return kernels::sq_norm(a); }
double norm(std::span<const double> a) { return std::sqrt(sq_norm(a)); }

double sq_distance(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "subtract");
  Vector out(a.size());
  kernels::waxpy(out, a, -1.0, b);
  return out;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "add");
  Vector out(a.size());
  kernels::waxpy(out, a, 1.0, b);
  return out;
}

Vector scaled(double s, std::span<const double> a) {
  Vector out(a.size());
  kernels::scale(out, s, a);
  return out;
}

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

Vector lu_solve(const Matrix& a, std::span<const double> b) {
  if (!a.square()) throw std::invalid_argument("lu_solve needs a square matrix");
  require_same_size(a.rows(), b.size(), "lu_solve");
  const std::size_t n = a.rows();
  Matrix lu = a;
  Vector x(b.begin(), b.end());
  const double scale = std::max(a.max_abs(), 1e-300);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (std::abs(lu(piv, k)) <= 1e-14 * scale) throw std::domain_error("lu_solve: matrix is singular");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      std::swap(x[k], x[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
      x[i] -= f * x[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = x[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= lu(k, j) * x[j];
    x[k] = s / lu(k, k);
  }
  return x;
}

double largest_singular_value(const Matrix& a, const PowerIterationOptions& opts) {
  const std::size_t n = a.cols();
  if (n == 0 || a.rows() == 0) return 0.0;
  if (a.max_abs() == 0.0) return 0.0;
  std::mt19937_64 gen(opts.seed);
  std::normal_distribution<double> normal;
  Vector v(n), av(a.rows()), w(n);
  for (double& e : v) e = normal(gen);
  kernels::scale(v, 1.0 / norm(v), v);
  constexpr std::size_t kWindow = 1000;
  double lambda_window = 0.0;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    a.apply(v, av);
    a.apply_transpose(av, w);
    const double lambda = kernels::dot(v, w);  // Rayleigh quotient of A^T A
    // With clustered top singular values the vector converges slowly while the
    // quotient has settled; its change over a window bounds the remaining error.
    if (it % kWindow == 0) {
      if (it > 0 && lambda > 0.0 && std::abs(lambda - lambda_window) <= 1e-15 * lambda) return std::sqrt(lambda);
      lambda_window = lambda;
    }
    // residual of the eigen-equation A^T A v = lambda v
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res += (w[i] - lambda * v[i]) * (w[i] - lambda * v[i]);
    res = std::sqrt(res);
    if (lambda > 0.0 && res <= opts.relative_tolerance * lambda) return std::sqrt(lambda);
    const double wn = norm(w);
    if (wn == 0.0) return 0.0;
    kernels::scale(v, 1.0 / wn, w);
  }
  throw ConvergenceError(
      fmt::format("power iteration did not converge in {} iterations", opts.max_iterations));
}

Vector singular_values(const Matrix& a) {
  // One-sided Jacobi on the columns of a copy of A (tall orientation).
  Matrix u = a.rows() >= a.cols() ? a : a.transpose();
  const std::size_t m = u.rows();
  const std::size_t n = u.cols();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (gamma == 0.0) continue;
        const double denom = std::sqrt(alpha * beta);
        if (denom == 0.0) continue;
        off = std::max(off, std::abs(gamma) / denom);
        if (std::abs(gamma) <= 1e-15 * denom) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double up = u(i, p);
          const double uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
      }
    }
    if (off <= 1e-15) break;
  }
  Vector sv(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += u(i, j) * u(i, j);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

SymmetricEigen symmetric_eigen(const Matrix& s) {
  if (!s.square()) throw std::invalid_argument("symmetric_eigen needs a square matrix");
  const std::size_t n = s.rows();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (s(i, j) + s(j, i));
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += a(i, j) * a(i, j);
        if (i != j) off += a(i, j) * a(i, j);
      }
    if (off <= 1e-30 * total || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

double spectral_radius(const Matrix& m) {
  if (!m.square()) throw std::invalid_argument("spectral_radius needs a square matrix");
  if (m.rows() > 64) throw std::invalid_argument("spectral_radius supports n <= 64");
  if (!m.all_finite()) throw std::invalid_argument("spectral_radius: non-finite entries");
  const auto n = static_cast<Eigen::Index>(m.rows());
  if (n == 0) return 0.0;
  Eigen::MatrixXd e(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) e(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::EigenSolver<Eigen::MatrixXd> solver(e, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw ConvergenceError("spectral_radius: eigensolver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace extragrad
