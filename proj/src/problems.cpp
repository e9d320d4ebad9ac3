#include "extragrad/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "extragrad/kernels.hpp"

namespace extragrad {

void AffineComponent::evaluate(std::span<const double> x, std::span<double> out) const {
  a.apply(x, out);
  kernels::axpy(1.0, c, out);
}

FiniteSumOperator::FiniteSumOperator(std::vector<AffineComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("finite-sum operator needs at least one component");
  dim_ = components_.front().a.rows();
  component_lipschitz_.reserve(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const AffineComponent& comp = components_[i];
    if (!comp.a.square() || comp.a.rows() != dim_ || comp.c.size() != dim_) {
      throw std::invalid_argument(fmt::format("component {} has inconsistent dimensions", i));
    }
    if (!comp.a.all_finite() || !all_finite(comp.c)) {
      throw std::invalid_argument(fmt::format("component {} has non-finite entries", i));
    }
    const double li = largest_singular_value(comp.a);
    const SymmetricEigen sym = symmetric_eigen(comp.a);
    if (!sym.values.empty() && sym.values.front() < -1e-10 * std::max(1.0, li)) {
      throw std::invalid_argument(fmt::format(
          "component {} is not monotone: symmetric part has eigenvalue {}", i, sym.values.front()));
    }
    component_lipschitz_.push_back(li);
    lipschitz_ = std::max(lipschitz_, li);
  }
}

void FiniteSumOperator::evaluate_component(std::size_t i, std::span<const double> x,
                                           std::span<double> out) const {
  require_same_size(x.size(), dim_, "operator argument");
  components_.at(i).evaluate(x, out);
}

void FiniteSumOperator::evaluate_full(std::span<const double> x, std::span<double> out) const {
  require_same_size(x.size(), dim_, "operator argument");
  require_same_size(out.size(), dim_, "operator output");
  Vector tmp(dim_);
  std::fill(out.begin(), out.end(), 0.0);
  for (const AffineComponent& comp : components_) {
    comp.evaluate(x, tmp);
    kernels::axpy(1.0, tmp, out);
  }
  kernels::scale(out, 1.0 / static_cast<double>(components_.size()), out);
}

Vector FiniteSumOperator::evaluate_full(std::span<const double> x) const {
  Vector out(dim_);
  evaluate_full(x, out);
  return out;
}

Matrix FiniteSumOperator::mean_matrix() const {
  Matrix m(dim_, dim_);
  for (const AffineComponent& comp : components_) m = m + comp.a;
  return (1.0 / static_cast<double>(components_.size())) * m;
}

Vector FiniteSumOperator::mean_offset() const {
  Vector c(dim_, 0.0);
  for (const AffineComponent& comp : components_) kernels::axpy(1.0, comp.c, c);
  kernels::scale(c, 1.0 / static_cast<double>(components_.size()), c);
  return c;
}

double FiniteSumOperator::variance_at(std::span<const double> x) const {
  const Vector mean = evaluate_full(x);
  Vector fi(dim_);
  double s = 0.0;
  for (const AffineComponent& comp : components_) {
    comp.evaluate(x, fi);
    s += sq_distance(fi, mean);
  }
  return s / static_cast<double>(components_.size());
}

bool FiniteSumOperator::skew_symmetric(double tol) const {
  for (const AffineComponent& comp : components_) {
    const double scale = std::max(1.0, comp.a.max_abs());
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j <= i; ++j)
        if (std::abs(comp.a(i, j) + comp.a(j, i)) > tol * scale) return false;
  }
  return true;
}

ComponentSample sample_component(const FiniteSumOperator& op, Rng& rng) {
  const std::size_t i = rng.uniform_index(op.size());
  return {i, &op.component(i)};
}

Vector evaluate_full(const FiniteSumOperator& op, std::span<const double> x) { return op.evaluate_full(x); }

double lipschitz_constant(const FiniteSumOperator& op) {
  double l = 0.0;
  for (const AffineComponent& comp : op.components()) l = std::max(l, largest_singular_value(comp.a));
  return l;
}

// ---------------------------------------------------------------------------

VIProblem::VIProblem(FiniteSumOperator op, ProxFunction g, std::optional<Vector> solution)
    : op_(std::move(op)), g_(std::move(g)), solution_(std::move(solution)) {
  if (solution_) {
    require_same_size(solution_->size(), op_.dimension(), "VI solution");
    const double eta = op_.lipschitz() > 0.0 ? 0.5 / op_.lipschitz() : 1.0;
    const double res = residual(*solution_, eta);
    const double tol = 1e-8 * std::max(1.0, norm(*solution_));
    if (!(res <= tol)) {
      throw std::invalid_argument(fmt::format("claimed VI solution has residual {:.3e} > {:.1e}", res, tol));
    }
  }
}

double VIProblem::residual(std::span<const double> x, double eta) const {
  Vector f = op_.evaluate_full(x);
  Vector v(x.size());
  kernels::waxpy(v, x, -eta, f);
  g_.prox(eta, v, v);
  return std::sqrt(sq_distance(x, v));
}

double VIProblem::noise_at_solution() const {
  if (!solution_) throw std::logic_error("noise_at_solution: problem has no known solution");
  return op_.variance_at(*solution_);
}

// ---------------------------------------------------------------------------

BilinearSaddle::BilinearSaddle(Matrix b_matrix, Vector a, Vector b)
    : b_(std::move(b_matrix)), a_(std::move(a)), bvec_(std::move(b)) {
  if (!b_.square()) throw std::invalid_argument("bilinear saddle needs a square B");
  require_same_size(a_.size(), b_.rows(), "linear term a");
  require_same_size(bvec_.size(), b_.rows(), "linear term b");
  const Vector sv = singular_values(b_);
  sigma_max_ = sv.front();
  sigma_min_ = sv.back();
  if (!(sigma_min_ >= 1e-12 * sigma_max_) || sigma_max_ == 0.0) {
    throw std::domain_error(fmt::format("B is rank deficient (sigma_min {:.3e}, sigma_max {:.3e})",
                                        sigma_min_, sigma_max_));
  }
  y_star_ = lu_solve(b_, scaled(-1.0, a_));
  x_star_ = lu_solve(b_.transpose(), scaled(-1.0, bvec_));
}

BilinearSaddle BilinearSaddle::planted(Matrix b_matrix, Vector x_star, Vector y_star) {
  require_same_size(x_star.size(), b_matrix.rows(), "planted x*");
  require_same_size(y_star.size(), b_matrix.rows(), "planted y*");
  Vector a = scaled(-1.0, b_matrix * y_star);
  Vector bt(b_matrix.cols());
  b_matrix.apply_transpose(x_star, bt);
  BilinearSaddle p(std::move(b_matrix), std::move(a), scaled(-1.0, bt));
  // keep the planted point itself rather than the re-solved one
  p.x_star_ = std::move(x_star);
  p.y_star_ = std::move(y_star);
  return p;
}

Vector BilinearSaddle::joint_solution() const {
  Vector z(x_star_);
  z.insert(z.end(), y_star_.begin(), y_star_.end());
  return z;
}

double BilinearSaddle::value(std::span<const double> x, std::span<const double> y) const {
  return dot(x, b_ * y) + dot(a_, x) + dot(bvec_, y);
}

Vector BilinearSaddle::gradient_x(std::span<const double> y) const { return add(b_ * y, a_); }

Vector BilinearSaddle::gradient_y(std::span<const double> x) const {
  Vector out(b_.cols());
  b_.apply_transpose(x, out);
  return add(out, bvec_);
}

Matrix bilinear_joint_matrix(const Matrix& b) {
  const std::size_t m = b.rows();
  Matrix j(2 * m, 2 * m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < m; ++c) {
      j(r, m + c) = b(r, c);
      j(m + c, r) = -b(r, c);
    }
  return j;
}

VIProblem saddle_to_vi(const BilinearSaddle& p) {
  if (p.sigma_min() < 1e-12 * p.sigma_max()) throw std::domain_error("saddle_to_vi: B is rank deficient");
  Vector c(p.a());
  for (double v : p.b()) c.push_back(-v);
  std::vector<AffineComponent> comps{{bilinear_joint_matrix(p.matrix()), std::move(c)}};
  return VIProblem(FiniteSumOperator(std::move(comps)), ProxFunction::zero(), p.joint_solution());
}

// ---------------------------------------------------------------------------

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  return m;
}

Vector gaussian_vector(std::size_t n, Rng& rng, double scale) {
  Vector v(n);
  for (double& e : v) e = scale * rng.normal();
  return v;
}

namespace {

// Mean-zero perturbations across components.
std::vector<Vector> centered_noise(std::size_t count, std::size_t dim, Rng& rng, double scale) {
  std::vector<Vector> eps(count);
  Vector mean(dim, 0.0);
  for (Vector& e : eps) {
    e = gaussian_vector(dim, rng, scale);
    kernels::axpy(1.0 / static_cast<double>(count), e, mean);
  }
  if (count > 1)
    for (Vector& e : eps) kernels::axpy(-1.0, mean, e);
  else
    std::fill(eps.front().begin(), eps.front().end(), 0.0);
  return eps;
}

}  // namespace

VIProblem finite_sum_bilinear(const FiniteSumBilinearOptions& opts, Rng& rng) {
  if (opts.dim == 0 || opts.components == 0) throw std::invalid_argument("finite_sum_bilinear: empty sizes");
  const std::size_t m = opts.dim;
  std::vector<Matrix> bs;
  bs.reserve(opts.components);
  for (std::size_t i = 0; i < opts.components; ++i) bs.push_back(gaussian_matrix(m, m, rng));
  Vector x_star(m, 0.0), y_star(m, 0.0);
  if (opts.planted_solution) {
    x_star = gaussian_vector(m, rng);
    y_star = gaussian_vector(m, rng);
  }
  std::vector<Vector> ea, eb;
  if (opts.noise_at_optimum) {
    ea = centered_noise(opts.components, m, rng, opts.linear_term_scale);
    eb = centered_noise(opts.components, m, rng, opts.linear_term_scale);
  }
  std::vector<AffineComponent> comps;
  comps.reserve(opts.components);
  for (std::size_t i = 0; i < opts.components; ++i) {
    // F_i(x, y) = (B_i y + a_i, -B_i^T x - b_i) with a_i = -B_i y* + e, b_i = -B_i^T x* + e'.
    Vector a = scaled(-1.0, bs[i] * y_star);
    Vector bt(m);
    bs[i].apply_transpose(x_star, bt);
    Vector b = scaled(-1.0, bt);
    if (opts.noise_at_optimum) {
      kernels::axpy(1.0, ea[i], a);
      kernels::axpy(1.0, eb[i], b);
    }
    Vector c(a);
    for (double v : b) c.push_back(-v);
    comps.push_back({bilinear_joint_matrix(bs[i]), std::move(c)});
  }
  Vector z(x_star);
  z.insert(z.end(), y_star.begin(), y_star.end());
  return VIProblem(FiniteSumOperator(std::move(comps)), ProxFunction::zero(), std::move(z));
}

FiniteSumOperator random_monotone_affine(const MonotoneAffineOptions& opts, Rng& rng) {
  const std::size_t d = opts.dim;
  if (d == 0 || opts.components == 0) throw std::invalid_argument("random_monotone_affine: empty sizes");
  std::vector<AffineComponent> comps;
  comps.reserve(opts.components);
  const double dd = static_cast<double>(d);
  for (std::size_t i = 0; i < opts.components; ++i) {
    const Matrix p = gaussian_matrix(d, d, rng);
    const Matrix k = gaussian_matrix(d, d, rng);
    Matrix a = (opts.symmetric_weight / dd) * (p * p.transpose()) +
               (opts.skew_weight / std::sqrt(2.0 * dd)) * (k - k.transpose());
    comps.push_back({std::move(a), gaussian_vector(d, rng)});
  }
  return FiniteSumOperator(std::move(comps));
}

VIProblem strongly_monotone_vi(const StronglyMonotoneOptions& opts, Rng& rng) {
  if (!(opts.mu > 0.0)) throw std::invalid_argument("strongly_monotone_vi: mu must be > 0");
  FiniteSumOperator base = random_monotone_affine(opts.op, rng);
  const std::size_t d = base.dimension();
  const Vector x_star = gaussian_vector(d, rng);
  const auto eps = centered_noise(base.size(), d, rng, opts.noise_scale);
  std::vector<AffineComponent> comps = base.components();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    // F_i(x*) = -mu x* + eps_i, so that F(x*) + mu x* = 0.
    Vector c = scaled(-1.0, comps[i].a * x_star);
    kernels::axpy(-opts.mu, x_star, c);
    if (opts.noise_scale > 0.0) kernels::axpy(1.0, eps[i], c);
    comps[i].c = std::move(c);
  }
  return VIProblem(FiniteSumOperator(std::move(comps)), ProxFunction::squared_l2(opts.mu), x_star);
}

}  // namespace extragrad
