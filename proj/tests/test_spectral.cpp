#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "extragrad/problems.hpp"
#include "extragrad/spectral.hpp"
#include "test_helpers.hpp"

using namespace extragrad;
using testing::to_eigen;

namespace {

// Explicit 2m x 2m update matrix of deterministic extragradient on x^T B y.
Eigen::MatrixXd update_matrix(const Eigen::MatrixXd& b, double eta1, double eta2) {
  const Eigen::Index m = b.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd u(2 * m, 2 * m);
  u << id - eta1 * eta2 * b * b.transpose(), -eta2 * b, eta2 * b.transpose(), id - eta1 * eta2 * b.transpose() * b;
  return u;
}

double eigen_radius(const Eigen::MatrixXd& m) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(m).eigenvalues().cwiseAbs().maxCoeff();
}

// Block derived from the scalar momentum recursion in singular coordinates.
Eigen::Matrix4d derived_block(double s, double e1, double e2, double b1, double b2) {
  const double d = 1 + b2 - e1 * e2 * s * s;
  Eigen::Matrix4d t;
  t << d, -e2 * (1 + b1) * s, -b2, e2 * b1 * s, e2 * (1 + b1) * s, d, -e2 * b1 * s, -b2, 1, 0, 0, 0, 0, 1, 0, 0;
  return t;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("contraction factor examples") {
    const SpectralReport r = eg_contraction_factor(1.0, 1.0, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0));
    CHECK(r.per_step_sq_factor == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(r.converges);
    const double e = 1 / std::sqrt(2.0);
    Eigen::Matrix2d block;
    block << 1 - e * e, -e, e, 1 - e * e;
    CHECK(std::pow(testing::operator_norm(block), 2) == doctest::Approx(0.75).epsilon(1e-14));

    const SpectralReport none = eg_contraction_factor(3.0, 0.5, 0.4, 0.0);
    CHECK(none.per_step_sq_factor == 1.0);
    CHECK_FALSE(none.converges);
    CHECK_THROWS_AS(eg_contraction_factor(1.0, 0.5, -0.1, 0.1), std::invalid_argument);
  }

  TEST_CASE("endpoint maximum matches a dense sweep") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
      const double smin = rng.uniform(0.01, 2.0), smax = smin + rng.uniform(0.0, 3.0);
      const double eta1 = rng.uniform(0.0, 1.5), eta2 = rng.uniform(0.0, 1.5);
      double sweep = 0.0;
      for (int i = 0; i < 1000; ++i) {
        const double s = smin + (smax - smin) * i / 999.0;
        sweep = std::max(sweep, std::pow(1 - eta1 * eta2 * s * s, 2) + eta2 * eta2 * s * s);
      }
      const double f = eg_contraction_factor(smax, smin, eta1, eta2).per_step_sq_factor;
      CHECK(std::abs(f - sweep) <= 1e-12 * std::max(1.0, sweep));
    }
  }

  TEST_CASE("factor equals the squared norm of the explicit update matrix") {
    Rng rng(42);
    int tested = 0;
    while (tested < 50) {
      const std::size_t m = 2 + rng.uniform_index(9);
      const Matrix b = gaussian_matrix(m, m, rng);
      const double smax = testing::operator_norm(to_eigen(b));
      const double eta1 = rng.uniform(0.05, 1.0) / smax, eta2 = rng.uniform(0.05, 1.0) / smax;
      const SpectralReport r = eg_contraction_factor(b, eta1, eta2);
      if (r.per_step_sq_factor >= 1.5) continue;
      ++tested;
      const double ref = std::pow(testing::operator_norm(update_matrix(to_eigen(b), eta1, eta2)), 2);
      CHECK(std::abs(r.per_step_sq_factor - ref) <= 1e-9);
    }
    const Matrix b10 = gaussian_matrix(10, 10, rng);
    const Stepsizes s = corollary_stepsizes(b10, 1);
    const double ref = std::pow(testing::operator_norm(update_matrix(to_eigen(b10), s.eta1, s.eta2)), 2);
    CHECK(std::abs(eg_contraction_factor(b10, s.eta1, s.eta2).per_step_sq_factor - ref) <= 1e-10);
  }

  TEST_CASE("stepsize presets") {
    const Stepsizes p1 = corollary_stepsizes(1.0, 0.3, 1);
    CHECK(p1.eta1 == doctest::Approx(0.7071067811865475).epsilon(1e-15));
    CHECK(p1.eta2 == doctest::Approx(0.7071067811865475).epsilon(1e-15));
    const Stepsizes p2 = corollary_stepsizes(2.0, 1.0, 2);
    CHECK(p2.eta1 == doctest::Approx(0.25 / (std::sqrt(2.0) * 4)).epsilon(1e-14));
    CHECK(p2.eta1 == doctest::Approx(0.044194).epsilon(1e-5));
    CHECK(p2.eta2 == doctest::Approx(0.70711).epsilon(1e-5));
    // The literal formulas give eta1 eta2 = 1/(2 sigma_max^4).
    CHECK(p2.eta1 * p2.eta2 == doctest::Approx(1.0 / 32.0).epsilon(1e-14));
    CHECK_THROWS_AS(corollary_stepsizes(2.0, 0.0, 2), std::domain_error);

    // Preset 1 always meets the stepsize preconditions.
    const SpectralReport r1 = corollary_report(2.0, 1.0, 1);
    CHECK(r1.preconditions_ok);
    CHECK(r1.preset == 1);
    CHECK(r1.corollary_bound == doctest::Approx(std::pow(1 - 0.25 / 6, 2)));
    // Preset 2 at sigma_max = 2, sigma_min = 1: eta2 = 0.707 exceeds 1/sigma_max.
    const SpectralReport r2 = corollary_report(2.0, 1.0, 2);
    CHECK_FALSE(r2.preconditions_ok);
    CHECK(r2.per_step_sq_factor == doctest::Approx(eg_sq_factor_at(2.0, p2.eta1, p2.eta2)));
    CHECK(std::isnan(eg_contraction_factor(2.0, 1.0, 0.1, 0.1).corollary_bound));
  }

  TEST_CASE("momentum block entries and radius") {
    const double eta = 0.3;
    const MomentumBlock b = momentum_block(1.0, eta, eta, 0.0, 0.0);
    CHECK(b.matrix(0, 0) == doctest::Approx(1 - eta * eta));
    CHECK(b.matrix(0, 1) == doctest::Approx(-eta));
    CHECK(b.matrix(1, 0) == doctest::Approx(eta));
    CHECK(b.matrix(1, 1) == doctest::Approx(1 - eta * eta));
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(b.matrix(2, c) == (c == 0 ? 1.0 : 0.0));
      CHECK(b.matrix(3, c) == (c == 1 ? 1.0 : 0.0));
    }
    CHECK(momentum_spectral_radius(0.5, 1.0, 1.0, 0.0, 0.0) == doctest::Approx(std::sqrt(0.8125)).epsilon(1e-12));
    CHECK(momentum_spectral_radius(1.0, 0.0, 0.0, 0.0, -0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(momentum_spectral_radius(0.0, 0.7, 0.7, 0.2, 0.4) == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(43);
    for (int trial = 0; trial < 200; ++trial) {
      const double s = rng.uniform(0.0, 2.0), e1 = rng.uniform(0.0, 1.0), e2 = rng.uniform(0.0, 1.0);
      const double b1 = rng.uniform(-0.95, 0.95), b2 = rng.uniform(-0.95, 0.95);
      const Eigen::Matrix4d ref = derived_block(s, e1, e2, b1, b2);
      const MomentumBlock mb = momentum_block(s, e1, e2, b1, b2);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          CHECK(mb.matrix(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) == doctest::Approx(ref(i, j)).epsilon(1e-15));
      CHECK(std::abs(momentum_spectral_radius(s, e1, e2, b1, b2) - eigen_radius(ref)) <= 1e-10);
      // Without momentum the radius is the square root of the extragradient factor.
      const double r0 = momentum_spectral_radius(s, e1, e1, 0.0, 0.0);
      CHECK(std::abs(r0 * r0 - (std::pow(1 - e1 * e1 * s * s, 2) + e1 * e1 * s * s)) <= 1e-12);
    }
  }

  TEST_CASE("spectral radius examples") {
    CHECK(spectral_radius(Matrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spectral_radius(Matrix::diagonal(Vector{0.5, -0.9, 0.1, 0.0})) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK_THROWS_AS(spectral_radius(Matrix(2, 3)), std::invalid_argument);
  }

  TEST_CASE("heatmap invariants") {
    for (HeatmapMode mode : {HeatmapMode::Beta1VsEtaSigma, HeatmapMode::Beta2VsEtaSigma, HeatmapMode::Beta1VsBeta2}) {
      CHECK(parse_heatmap_mode(heatmap_mode_name(mode)) == mode);
      const HeatmapSpec d = HeatmapSpec::defaults(mode);
      CHECK(d.x_axis.steps == 200);
      CHECK(d.y_axis.steps == 200);
    }
    HeatmapSpec spec = HeatmapSpec::defaults(HeatmapMode::Beta1VsEtaSigma);
    spec.x_axis.steps = 11;
    spec.y_axis.steps = 13;
    for (std::size_t threads : {1, 4}) {
      const Heatmap h = heatmap_grid(spec, threads);
      REQUIRE(h.x_values.front() == 0.0);
      for (std::size_t r = 0; r < h.y_values.size(); ++r) CHECK(h.ratio(r, 0) == 1.0);
      for (std::size_t r = 0; r < h.y_values.size(); ++r)
        for (std::size_t c = 0; c < h.x_values.size(); ++c) {
          const double rho = momentum_spectral_radius(h.y_values[r], 1.0, 1.0, h.x_values[c], 0.0);
          CHECK(h.radius(r, c) == rho);
          CHECK(h.diverges_at(r, c) == (rho >= 1.0));
        }
    }
    HeatmapSpec tiny{HeatmapMode::Beta2VsEtaSigma, {-0.2, -0.2, 2}, {0.5, 0.5, 2}, 0.01};
    const Heatmap t = heatmap_grid(tiny);
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 2; ++c) CHECK(std::isfinite(t.ratio(r, c)));
    HeatmapSpec bad = tiny;
    bad.x_axis.steps = 1;
    CHECK_THROWS_AS(heatmap_grid(bad), std::invalid_argument);
  }

  TEST_CASE("negative update momentum near -0.3 is optimal for moderate eta sigma") {
    HeatmapSpec spec{HeatmapMode::Beta2VsEtaSigma, {-0.6, 0.0, 601}, {0.3, 0.7, 41}, 0.01};
    const Heatmap h = heatmap_grid(spec, 2);
    for (std::size_t r = 0; r < h.y_values.size(); ++r) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < h.x_values.size(); ++c)
        if (h.ratio(r, c) < h.ratio(r, best)) best = c;
      CAPTURE(h.y_values[r]);
      CHECK(std::abs(h.x_values[best] + 0.3) <= 0.1);
    }
  }
}
