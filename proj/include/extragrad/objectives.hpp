#pragma once

#include <memory>
#include <span>
#include <string>

#include "extragrad/linalg.hpp"
#include "extragrad/rng.hpp"

namespace extragrad {

/// One draw of xi. Finite-sum objectives use the index, additive-noise
/// objectives the noise vector; a sample may be reused for several gradients.
struct GradientSample {
  std::size_t index = 0;
  Vector noise;
};

/// Smooth, bounded-below objective f(x) = E f(x; xi) with unbiased
/// stochastic gradients of uniformly bounded variance.
class StochasticObjective {
 public:
  virtual ~StochasticObjective() = default;

  virtual std::size_t dimension() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;
  virtual GradientSample draw(Rng& rng) const = 0;
  virtual void stochastic_gradient(std::span<const double> x, const GradientSample& s,
                                   std::span<double> out) const = 0;

  /// Gradient Lipschitz constant L (on the region where in_smooth_region holds).
  virtual double smoothness() const = 0;
  /// sigma^2 bounding E||grad f(x; xi) - grad f(x)||^2 for all x.
  virtual double gradient_noise() const = 0;
  /// f* = inf f.
  virtual double infimum() const = 0;
  virtual bool in_smooth_region(std::span<const double>) const { return true; }
  virtual std::string description() const = 0;
};

/// f(x) = (1/n) sum_i 0.5 (x - b_i)^T H (x - b_i) with symmetric PSD H.
/// Gradient noise is (1/n) sum_i ||H (b_i - b_mean)||^2, constant in x.
class FiniteSumQuadratic final : public StochasticObjective {
 public:
  FiniteSumQuadratic(Matrix hessian, std::vector<Vector> shifts);

  std::size_t dimension() const override { return h_.rows(); }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  GradientSample draw(Rng& rng) const override;
  void stochastic_gradient(std::span<const double> x, const GradientSample& s,
                           std::span<double> out) const override;
  double smoothness() const override { return l_; }
  double gradient_noise() const override { return sigma_sq_; }
  double infimum() const override { return f_star_; }
  std::string description() const override;

  const Vector& minimizer() const { return mean_shift_; }

 private:
  Matrix h_;
  std::vector<Vector> shifts_;
  Vector mean_shift_;
  double l_ = 0.0, sigma_sq_ = 0.0, f_star_ = 0.0;
};

/// f(x) = sum_j (x_j^2 - 1)^2 with additive N(0, s^2 I) gradient noise.
/// The curvature 12 x^2 - 4 is unbounded, so L is taken over the box
/// |x_j| <= region and runs report whether they stayed inside it.
class NoisyQuartic final : public StochasticObjective {
 public:
  NoisyQuartic(std::size_t dim, double noise_std, double region = 1.5);

  std::size_t dimension() const override { return dim_; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  GradientSample draw(Rng& rng) const override;
  void stochastic_gradient(std::span<const double> x, const GradientSample& s,
                           std::span<double> out) const override;
  double smoothness() const override;
  double gradient_noise() const override { return static_cast<double>(dim_) * noise_std_ * noise_std_; }
  double infimum() const override { return 0.0; }
  bool in_smooth_region(std::span<const double> x) const override;
  std::string description() const override;

 private:
  std::size_t dim_;
  double noise_std_;
  double region_;
};

/// Random instance: H = Q diag(linspace(lo, hi)) Q^T, n Gaussian shifts of scale s.
std::unique_ptr<FiniteSumQuadratic> random_quadratic(std::size_t dim, std::size_t components,
                                                     double eig_lo, double eig_hi, double shift_scale,
                                                     Rng& rng);

}  // namespace extragrad
