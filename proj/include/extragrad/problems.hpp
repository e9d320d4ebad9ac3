#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "extragrad/linalg.hpp"
#include "extragrad/prox.hpp"
#include "extragrad/rng.hpp"

namespace extragrad {

/// F(x; i) = A x + c.
struct AffineComponent {
  Matrix a;
  Vector c;

  void evaluate(std::span<const double> x, std::span<double> out) const;
  friend bool operator==(const AffineComponent&, const AffineComponent&) = default;
};

/// Stochastic operator F(x; xi) given as a uniform finite family of affine
/// maps, F(x) = (1/n) sum_i (A_i x + c_i). Immutable after construction.
class FiniteSumOperator {
 public:
  /// Validates dimensions and that every component is monotone
  /// (symmetric part positive semidefinite up to 1e-10 relative).
  explicit FiniteSumOperator(std::vector<AffineComponent> components);

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return components_.size(); }
  const AffineComponent& component(std::size_t i) const { return components_.at(i); }
  const std::vector<AffineComponent>& components() const { return components_; }

  void evaluate_component(std::size_t i, std::span<const double> x, std::span<double> out) const;

  /// Exact average over all components.
  Vector evaluate_full(std::span<const double> x) const;
  void evaluate_full(std::span<const double> x, std::span<double> out) const;

  /// max_i sigma_max(A_i), computed once at construction.
  double lipschitz() const { return lipschitz_; }
  const Vector& component_lipschitz() const { return component_lipschitz_; }

  /// (1/n) sum_i A_i and (1/n) sum_i c_i.
  Matrix mean_matrix() const;
  Vector mean_offset() const;

  /// sigma_x^2 = (1/n) sum_i ||F(x; i) - F(x)||^2, exact.
  double variance_at(std::span<const double> x) const;

  /// True when every A_i + A_i^T vanishes (pure rotation components).
  bool skew_symmetric(double tol = 1e-12) const;

  bool deterministic() const { return components_.size() == 1; }

 private:
  std::vector<AffineComponent> components_;
  std::size_t dim_ = 0;
  Vector component_lipschitz_;
  double lipschitz_ = 0.0;
};

struct ComponentSample {
  std::size_t index;
  const AffineComponent* map;
};

/// Uniform index with replacement; identical Rng state gives identical indices.
ComponentSample sample_component(const FiniteSumOperator& op, Rng& rng);

/// Evaluating the full operator through the free-function spelling.
Vector evaluate_full(const FiniteSumOperator& op, std::span<const double> x);

/// max_i sigma_max(A_i) by power iteration (relative tolerance 1e-10).
double lipschitz_constant(const FiniteSumOperator& op);

/// Find x* with g(x) - g(x*) + <F(x*), x - x*> >= 0 for all x.
class VIProblem {
 public:
  /// If a solution is given, checks ||x* - prox_{eta g}(x* - eta F(x*))|| small
  /// at eta = 1/(2L); throws std::invalid_argument otherwise.
  VIProblem(FiniteSumOperator op, ProxFunction g, std::optional<Vector> solution = std::nullopt);

  const FiniteSumOperator& op() const { return op_; }
  const ProxFunction& regularizer() const { return g_; }
  const std::optional<Vector>& solution() const { return solution_; }
  std::size_t dimension() const { return op_.dimension(); }

  /// ||x - prox_{eta g}(x - eta F(x))||, zero exactly at solutions.
  double residual(std::span<const double> x, double eta) const;

  /// Noise at the solution, (1/n) sum_i ||F(x*; i) - F(x*)||^2. Requires a solution.
  double noise_at_solution() const;

 private:
  FiniteSumOperator op_;
  ProxFunction g_;
  std::optional<Vector> solution_;
};

/// min_x max_y x^T B y + a^T x + b^T y with square full-rank B.
class BilinearSaddle {
 public:
  /// Solves B y* = -a, B^T x* = -b. Rejects rank-deficient B
  /// (sigma_min < 1e-12 sigma_max) with std::domain_error.
  BilinearSaddle(Matrix b_matrix, Vector a, Vector b);

  /// a = -B y*, b = -B^T x*.
  static BilinearSaddle planted(Matrix b_matrix, Vector x_star, Vector y_star);

  const Matrix& matrix() const { return b_; }
  const Vector& a() const { return a_; }
  const Vector& b() const { return bvec_; }
  const Vector& x_star() const { return x_star_; }
  const Vector& y_star() const { return y_star_; }
  std::size_t size() const { return b_.rows(); }

  double sigma_max() const { return sigma_max_; }
  double sigma_min() const { return sigma_min_; }
  /// sigma_min^2 / sigma_max^2
  double kappa() const { return sigma_min_ * sigma_min_ / (sigma_max_ * sigma_max_); }

  /// The stacked (x*, y*).
  Vector joint_solution() const;

  double value(std::span<const double> x, std::span<const double> y) const;
  Vector gradient_x(std::span<const double> y) const;  // B y + a
  Vector gradient_y(std::span<const double> x) const;  // B^T x + b

 private:
  Matrix b_;
  Vector a_, bvec_, x_star_, y_star_;
  double sigma_max_ = 0.0, sigma_min_ = 0.0;
};

/// Joint operator F(x, y) = (B y + a, -B^T x - b) on R^{2m}, g = Zero,
/// solution (x*, y*).
VIProblem saddle_to_vi(const BilinearSaddle& p);

/// The skew block matrix [[0, B], [-B^T, 0]] of the joint operator.
Matrix bilinear_joint_matrix(const Matrix& b);

// ---------------------------------------------------------------------------
// Generators ("gaussian" distribution). All randomness comes from the given
// Rng, so a (seed, parameters) pair reproduces the instance.

/// d x d matrix with iid N(0, scale^2) entries.
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0);
Vector gaussian_vector(std::size_t n, Rng& rng, double scale = 1.0);

struct FiniteSumBilinearOptions {
  std::size_t dim = 20;          // B_i is dim x dim, joint dimension 2*dim
  std::size_t components = 10;   // n
  bool noise_at_optimum = false; // false: every F(.; i) vanishes at z*
  bool planted_solution = false; // false: z* = 0
  double linear_term_scale = 1.0;
};

/// Finite-sum bilinear instance min_x max_y (1/n) sum_i x^T B_i y + a_i^T x + b_i^T y.
/// With noise_at_optimum the linear terms carry mean-zero perturbations so
/// that only their average vanishes at z*.
VIProblem finite_sum_bilinear(const FiniteSumBilinearOptions& opts, Rng& rng);

struct MonotoneAffineOptions {
  std::size_t dim = 8;
  std::size_t components = 1;
  double symmetric_weight = 1.0;  // scale of the PSD part
  double skew_weight = 1.0;       // scale of the skew part
};

/// Components A_i = s P P^T / d + k (K - K^T) / sqrt(2d), c_i Gaussian.
FiniteSumOperator random_monotone_affine(const MonotoneAffineOptions& opts, Rng& rng);

struct StronglyMonotoneOptions {
  MonotoneAffineOptions op{};
  double mu = 1.0;          // strong convexity of g = (mu/2)||x||^2
  double noise_scale = 0.0; // 0 gives zero noise at the solution
};

/// Monotone affine components with g = SquaredL2(mu) and a planted solution.
VIProblem strongly_monotone_vi(const StronglyMonotoneOptions& opts, Rng& rng);

}  // namespace extragrad
