#include "extragrad/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "extragrad/kernels.hpp"

namespace extragrad {

FiniteSumQuadratic::FiniteSumQuadratic(Matrix hessian, std::vector<Vector> shifts)
    : h_(std::move(hessian)), shifts_(std::move(shifts)) {
  if (!h_.square() || h_.rows() == 0) throw std::invalid_argument("quadratic: Hessian must be square");
  if (shifts_.empty()) throw std::invalid_argument("quadratic: need at least one shift");
  const SymmetricEigen eig = symmetric_eigen(h_);
  if (eig.values.front() < -1e-12 * std::max(1.0, eig.values.back()))
    throw std::invalid_argument("quadratic: Hessian is not positive semidefinite");
  l_ = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  const std::size_t d = h_.rows();
  mean_shift_.assign(d, 0.0);
  for (const Vector& b : shifts_) {
    require_same_size(b.size(), d, "quadratic shift");
    kernels::axpy(1.0 / static_cast<double>(shifts_.size()), b, mean_shift_);
  }
  double s = 0.0;
  for (const Vector& b : shifts_) s += sq_norm(h_ * subtract(b, mean_shift_));
  sigma_sq_ = s / static_cast<double>(shifts_.size());
  f_star_ = value(mean_shift_);
}

double FiniteSumQuadratic::value(std::span<const double> x) const {
  double s = 0.0;
  for (const Vector& b : shifts_) {
    const Vector e = subtract(x, b);
    s += 0.5 * dot(e, h_ * e);
  }
  return s / static_cast<double>(shifts_.size());
}

void FiniteSumQuadratic::gradient(std::span<const double> x, std::span<double> out) const {
  // grad f = H (x - b_mean)
  h_.apply(subtract(x, mean_shift_), out);
}

GradientSample FiniteSumQuadratic::draw(Rng& rng) const { return {rng.uniform_index(shifts_.size()), {}}; }

void FiniteSumQuadratic::stochastic_gradient(std::span<const double> x, const GradientSample& s,
                                             std::span<double> out) const {
  h_.apply(subtract(x, shifts_.at(s.index)), out);
}

std::string FiniteSumQuadratic::description() const {
  return fmt::format("finite-sum quadratic d={} n={} L={:.6g} sigma^2={:.6g}", h_.rows(), shifts_.size(), l_,
                     sigma_sq_);
}

NoisyQuartic::NoisyQuartic(std::size_t dim, double noise_std, double region)
    : dim_(dim), noise_std_(noise_std), region_(region) {
  if (dim == 0) throw std::invalid_argument("quartic: dimension must be positive");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("quartic: noise std must be >= 0");
  if (!(region >= 1.0)) throw std::invalid_argument("quartic: region must contain the minimizers");
}

double NoisyQuartic::value(std::span<const double> x) const {
  double s = 0.0;
  for (double v : x) s += (v * v - 1.0) * (v * v - 1.0);
  return s;
}

void NoisyQuartic::gradient(std::span<const double> x, std::span<double> out) const {
  for (std::size_t j = 0; j < dim_; ++j) out[j] = 4.0 * x[j] * (x[j] * x[j] - 1.0);
}

GradientSample NoisyQuartic::draw(Rng& rng) const {
  GradientSample s;
  s.noise.resize(dim_);
  for (double& e : s.noise) e = noise_std_ * rng.normal();
  return s;
}

void NoisyQuartic::stochastic_gradient(std::span<const double> x, const GradientSample& s,
                                       std::span<double> out) const {
  gradient(x, out);
  if (!s.noise.empty()) kernels::axpy(1.0, s.noise, out);
}

double NoisyQuartic::smoothness() const { return std::max(12.0 * region_ * region_ - 4.0, 4.0); }

bool NoisyQuartic::in_smooth_region(std::span<const double> x) const {
  return std::all_of(x.begin(), x.end(), [&](double v) { return std::abs(v) <= region_; });
}

std::string NoisyQuartic::description() const {
  return fmt::format("noisy quartic d={} noise_std={:.6g} region={:.6g} L={:.6g}", dim_, noise_std_, region_,
                     smoothness());
}

std::unique_ptr<FiniteSumQuadratic> random_quadratic(std::size_t dim, std::size_t components,
                                                     double eig_lo, double eig_hi, double shift_scale,
                                                     Rng& rng) {
  // Orthogonal Q from Gram-Schmidt on a Gaussian matrix.
  Matrix q(dim, dim);
  for (std::size_t c = 0; c < dim; ++c) {
    Vector v(dim);
    for (double& e : v) e = rng.normal();
    for (std::size_t p = 0; p < c; ++p) {
      double proj = 0.0;
      for (std::size_t r = 0; r < dim; ++r) proj += q(r, p) * v[r];
      for (std::size_t r = 0; r < dim; ++r) v[r] -= proj * q(r, p);
    }
    const double nv = norm(v);
    for (std::size_t r = 0; r < dim; ++r) q(r, c) = v[r] / nv;
  }
  Vector eig(dim);
  for (std::size_t i = 0; i < dim; ++i)
    eig[i] = dim == 1 ? eig_hi : eig_lo + (eig_hi - eig_lo) * static_cast<double>(i) / static_cast<double>(dim - 1);
  Matrix h = q * Matrix::diagonal(eig) * q.transpose();
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < i; ++j) h(i, j) = h(j, i) = 0.5 * (h(i, j) + h(j, i));
  std::vector<Vector> shifts(components);
  for (Vector& b : shifts) {
    b.resize(dim);
    for (double& e : b) e = shift_scale * rng.normal();
  }
  return std::make_unique<FiniteSumQuadratic>(std::move(h), std::move(shifts));
}

}  // namespace extragrad
