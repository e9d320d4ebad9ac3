#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "extragrad/kernels.hpp"
#include "extragrad/verify.hpp"

namespace extragrad {

namespace {

// argmin of 0.5 u^T M u + g^T u over ||u|| <= r for symmetric M.
Vector trust_region_minimizer(const Matrix& m, std::span<const double> g, double r) {
  const std::size_t d = g.size();
  const SymmetricEigen e = symmetric_eigen(m);
  Vector gamma(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) gamma[i] += e.vectors(j, i) * g[j];
  const double lam1 = e.values.front();
  double scale = 0.0;
  for (double v : e.values) scale = std::max(scale, std::abs(v));
  const double gnorm = norm(g);

  auto assemble = [&](double nu, std::size_t skip_below, double tau) {
    Vector u(d, 0.0);
    for (std::size_t i = skip_below; i < d; ++i) {
      const double coef = -gamma[i] / (e.values[i] + nu);
      for (std::size_t j = 0; j < d; ++j) u[j] += coef * e.vectors(j, i);
    }
    if (tau != 0.0)
      for (std::size_t j = 0; j < d; ++j) u[j] += tau * e.vectors(j, 0);
    return u;
  };

  if (gnorm == 0.0) {
    if (lam1 >= 0.0) return Vector(d, 0.0);
    return assemble(0.0, d, r);
  }
  if (lam1 > 0.0) {
    Vector u = assemble(0.0, 0, 0.0);
    if (norm(u) <= r) return u;
  }
  const double lo = std::max(0.0, -lam1);
  // Hard case: g has no weight on the bottom eigenspace.
  std::size_t bottom = 0;
  while (bottom < d && e.values[bottom] - lam1 <= 1e-12 * std::max(scale, 1e-300)) ++bottom;
  double bottom_weight = 0.0;
  for (std::size_t i = 0; i < bottom; ++i) bottom_weight += gamma[i] * gamma[i];
  if (bottom_weight <= 1e-28 * gnorm * gnorm && bottom < d) {
    Vector u = assemble(lo, bottom, 0.0);
    const double nu_sq = sq_norm(u);
    if (nu_sq <= r * r && (lam1 <= 0.0)) {
      return assemble(lo, bottom, std::sqrt(std::max(0.0, r * r - nu_sq)));
    }
  }
  auto phi = [&](double nu) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double den = e.values[i] + nu;
      s += gamma[i] * gamma[i] / (den * den);
    }
    return s;
  };
  double a = lo, b = std::max(lo, gnorm / r - lam1) + 1e-300;
  while (phi(b) > r * r) b = 2.0 * b + 1e-300;
  for (int it = 0; it < 300 && b > a; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (phi(mid) > r * r)
      a = mid;
    else
      b = mid;
  }
  return assemble(b, 0, 0.0);
}

double quadratic_value(const Matrix& p, std::span<const double> q, double k, std::span<const double> x) {
  return 0.5 * dot(x, p * x) + dot(q, x) + k;
}

Vector project_ball(std::span<const double> v, const Ball& ball) {
  Vector diff = subtract(v, ball.center);
  const double n = norm(diff);
  if (n <= ball.radius) return Vector(v.begin(), v.end());
  return add(ball.center, scaled(ball.radius / n, diff));
}

struct AffineGapData {
  Matrix a;
  Vector c;
  double mu = 0.0;
  Vector center;  // of the squared_l2 regularizer
};

AffineGapData affine_data(const VIProblem& p) {
  AffineGapData d{p.op().mean_matrix(), p.op().mean_offset(), 0.0, Vector(p.dimension(), 0.0)};
  const auto& v = p.regularizer().variant();
  if (const auto* sq = std::get_if<regularizers::SquaredL2>(&v)) {
    d.mu = sq->mu;
    if (!sq->center.empty()) d.center = sq->center;
  } else if (!p.regularizer().is_zero()) {
    throw std::invalid_argument("restricted_gap supports g = zero or squared_l2 only");
  }
  return d;
}

}  // namespace

BallMaximum maximize_quadratic_on_ball(const Matrix& p, std::span<const double> q, double k, const Ball& ball) {
  const std::size_t d = q.size();
  if (!p.square() || p.rows() != d) throw std::invalid_argument("maximize_quadratic_on_ball: shape mismatch");
  require_same_size(ball.center.size(), d, "ball center");
  if (!(ball.radius > 0.0)) throw std::invalid_argument("ball radius must be > 0");
  // x = center + u: f = 0.5 u^T P u + (P center + q)^T u + f(center); minimize -f.
  Vector lin = p * ball.center;
  kernels::axpy(1.0, q, lin);
  const Matrix neg = -1.0 * p;
  const Vector u = trust_region_minimizer(neg, scaled(-1.0, lin), ball.radius);
  BallMaximum out;
  out.argmax = add(ball.center, u);
  out.value = quadratic_value(p, q, k, out.argmax);
  return out;
}

double gap_objective(const VIProblem& p, std::span<const double> x_hat, std::span<const double> x) {
  const Vector fx = p.op().evaluate_full(x);
  return p.regularizer().value(x_hat) - p.regularizer().value(x) + dot(fx, subtract(x_hat, x));
}

GapEstimate restricted_gap(const VIProblem& p, std::span<const double> x_hat, const Ball& ball) {
  const std::size_t n = p.dimension();
  require_same_size(x_hat.size(), n, "gap point");
  require_same_size(ball.center.size(), n, "ball center");
  const AffineGapData d = affine_data(p);

  // phi(x) = 0.5 x^T P x + q^T x + k with P = -(A + A^T) - mu I, q = A^T x_hat - c + mu c_g.
  Matrix pm = -1.0 * (d.a + d.a.transpose());
  for (std::size_t i = 0; i < n; ++i) pm(i, i) -= d.mu;
  Vector q(n);
  d.a.apply_transpose(x_hat, q);
  kernels::axpy(-1.0, d.c, q);
  kernels::axpy(d.mu, d.center, q);

  GapEstimate g;
  g.x_hat.assign(x_hat.begin(), x_hat.end());
  g.ball = ball;
  if (d.mu == 0.0 && p.op().skew_symmetric()) {
    g.closed_form = true;
    const double qn = norm(q);
    g.maximizer = qn > 0.0 ? add(ball.center, scaled(ball.radius / qn, q)) : ball.center;
    g.gap = gap_objective(p, x_hat, ball.center) + ball.radius * qn;
  } else {
    g.maximizer = maximize_quadratic_on_ball(pm, q, 0.0, ball).argmax;
    g.gap = gap_objective(p, x_hat, g.maximizer);
  }
  Vector grad = pm * g.maximizer;
  kernels::axpy(1.0, q, grad);
  g.gradient_mapping = std::sqrt(sq_distance(g.maximizer, project_ball(add(g.maximizer, grad), ball)));
  return g;
}

BallMaximum ergodic_sup_term(const VIProblem& p, std::span<const double> x0, const Ball& ball) {
  const FiniteSumOperator& op = p.op();
  const std::size_t d = op.dimension();
  require_same_size(x0.size(), d, "initial point");
  const double l = op.lipschitz();
  const double n = static_cast<double>(op.size());
  const Matrix abar = op.mean_matrix();
  const Vector cbar = op.mean_offset();
  // (L^2/2)||x0 - x||^2 + (1/n) sum ||D_i x + e_i||^2, D_i = A_i - A_bar, e_i = c_i - c_bar.
  Matrix pm = (l * l) * Matrix::identity(d);
  Vector q = scaled(-l * l, x0);
  double k = 0.5 * l * l * sq_norm(x0);
  for (const AffineComponent& comp : op.components()) {
    const Matrix di = comp.a - abar;
    const Vector ei = subtract(comp.c, cbar);
    pm = pm + (2.0 / n) * (di.transpose() * di);
    Vector dte(d);
    di.apply_transpose(ei, dte);
    kernels::axpy(2.0 / n, dte, q);
    k += sq_norm(ei) / n;
  }
  BallMaximum m = maximize_quadratic_on_ball(pm, q, k, ball);
  m.value = 0.5 * l * l * sq_distance(x0, m.argmax) + op.variance_at(m.argmax);
  return m;
}

}  // namespace extragrad
