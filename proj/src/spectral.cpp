#include "extragrad/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "extragrad/parallel.hpp"

namespace extragrad {

namespace {

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(fmt::format("{} must be finite and >= 0", name));
}

}  // namespace

double eg_sq_factor_at(double sigma, double eta1, double eta2) {
  const double a = 1.0 - eta1 * eta2 * sigma * sigma;
  return a * a + eta2 * eta2 * sigma * sigma;
}

SpectralReport eg_contraction_factor(double sigma_max, double sigma_min, double eta1, double eta2) {
  require_nonnegative(eta1, "eta1");
  require_nonnegative(eta2, "eta2");
  require_nonnegative(sigma_min, "sigma_min");
  if (!(sigma_max >= sigma_min) || !std::isfinite(sigma_max))
    throw std::invalid_argument("sigma_max must be finite and >= sigma_min");

  SpectralReport r;
  r.sigma_max = sigma_max;
  r.sigma_min = sigma_min;
  r.eta1 = eta1;
  r.eta2 = eta2;
  double f = std::max(eg_sq_factor_at(sigma_max, eta1, eta2), eg_sq_factor_at(sigma_min, eta1, eta2));
  // In s = sigma^2 the factor is a^2 s^2 + (eta2^2 - 2a) s + 1 with a = eta1 eta2,
  // whose only critical point is a minimum; checked for safety.
  const double a = eta1 * eta2;
  if (a > 0.0) {
    const double s = (2.0 * a - eta2 * eta2) / (2.0 * a * a);
    if (s >= sigma_min * sigma_min && s <= sigma_max * sigma_max)
      f = std::max(f, eg_sq_factor_at(std::sqrt(s), eta1, eta2));
  }
  r.per_step_sq_factor = f;
  r.converges = f < 1.0;
  r.preconditions_ok = sigma_max > 0.0 && eta2 < 1.0 / sigma_max && eta1 * eta2 < 2.0 / (sigma_max * sigma_max);
  r.corollary_bound = std::numeric_limits<double>::quiet_NaN();
  return r;
}

SpectralReport eg_contraction_factor(const Matrix& b, double eta1, double eta2) {
  const Vector sv = singular_values(b);
  if (sv.empty()) throw std::invalid_argument("empty matrix");
  return eg_contraction_factor(sv.front(), sv.back(), eta1, eta2);
}

Stepsizes corollary_stepsizes(double sigma_max, double sigma_min, int preset) {
  if (!(sigma_max > 0.0)) throw std::invalid_argument("sigma_max must be > 0");
  if (preset == 1) {
    const double e = 1.0 / (std::sqrt(2.0) * sigma_max);
    return {e, e};
  }
  if (preset == 2) {
    if (!(sigma_min > 0.0)) throw std::domain_error("stepsize preset 2 needs sigma_min > 0");
    const double kappa = sigma_min * sigma_min / (sigma_max * sigma_max);
    const double s2 = sigma_max * sigma_max;
    return {kappa / (std::sqrt(2.0) * s2), 1.0 / (std::sqrt(2.0) * kappa * s2)};
  }
  throw std::invalid_argument(fmt::format("unknown stepsize preset {} (expected 1 or 2)", preset));
}

Stepsizes corollary_stepsizes(const Matrix& b, int preset) {
  const Vector sv = singular_values(b);
  return corollary_stepsizes(sv.front(), sv.back(), preset);
}

SpectralReport corollary_report(double sigma_max, double sigma_min, int preset) {
  const Stepsizes s = corollary_stepsizes(sigma_max, sigma_min, preset);
  SpectralReport r = eg_contraction_factor(sigma_max, sigma_min, s.eta1, s.eta2);
  r.preset = preset;
  const double c = 1.0 - r.kappa() / (preset == 1 ? 6.0 : 4.0);
  r.corollary_bound = c * c;
  return r;
}

SpectralReport corollary_report(const Matrix& b, int preset) {
  const Vector sv = singular_values(b);
  return corollary_report(sv.front(), sv.back(), preset);
}

// ---------------------------------------------------------------------------

MomentumBlock momentum_block(double sigma, double eta1, double eta2, double beta1, double beta2) {
  const double d = 1.0 + beta2 - eta1 * eta2 * sigma * sigma;
  const double off = eta2 * (1.0 + beta1) * sigma;
  const double mom = eta2 * beta1 * sigma;
  MomentumBlock b{sigma, eta1, eta2, beta1, beta2,
                  Matrix{{d, -off, -beta2, mom},
                         {off, d, -mom, -beta2},
                         {1.0, 0.0, 0.0, 0.0},
                         {0.0, 1.0, 0.0, 0.0}}};
  return b;
}

double momentum_spectral_radius(double sigma, double eta1, double eta2, double beta1, double beta2) {
  using C = std::complex<double>;
  const C p(1.0 + beta2 - eta1 * eta2 * sigma * sigma, eta2 * (1.0 + beta1) * sigma);
  const C q(-beta2, -eta2 * beta1 * sigma);
  // Larger root without cancellation, the other from the product l1 l2 = -q.
  C root = std::sqrt(p * p + 4.0 * q);
  if (std::real(std::conj(p) * root) < 0.0) root = -root;
  const C l1 = 0.5 * (p + root);
  if (std::abs(l1) == 0.0) return 0.0;
  const C l2 = -q / l1;
  return std::max(std::abs(l1), std::abs(l2));
}

double momentum_spectral_radius(const MomentumBlock& b) {
  return momentum_spectral_radius(b.sigma, b.eta1, b.eta2, b.beta1, b.beta2);
}

// ---------------------------------------------------------------------------

std::string heatmap_mode_name(HeatmapMode m) {
  switch (m) {
    case HeatmapMode::Beta1VsEtaSigma: return "beta1_vs_etasigma";
    case HeatmapMode::Beta2VsEtaSigma: return "beta2_vs_etasigma";
    case HeatmapMode::Beta1VsBeta2: return "beta1_vs_beta2";
  }
  return "unknown";
}

std::optional<HeatmapMode> parse_heatmap_mode(std::string_view s) {
  for (HeatmapMode m : {HeatmapMode::Beta1VsEtaSigma, HeatmapMode::Beta2VsEtaSigma, HeatmapMode::Beta1VsBeta2})
    if (heatmap_mode_name(m) == s) return m;
  return std::nullopt;
}

Vector GridAxis::values() const {
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument("grid bounds must be finite");
  if (steps < 2) throw std::invalid_argument("grid needs at least 2 steps");
  Vector v(steps);
  for (std::size_t i = 0; i < steps; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
  v.back() = hi;
  return v;
}

HeatmapSpec HeatmapSpec::defaults(HeatmapMode mode) {
  HeatmapSpec s;
  s.mode = mode;
  switch (mode) {
    case HeatmapMode::Beta1VsEtaSigma:
      s.x_axis = {0.0, 0.995, 200};
      s.y_axis = {0.005, 1.0, 200};
      break;
    case HeatmapMode::Beta2VsEtaSigma:
      s.x_axis = {0.0, -0.995, 200};
      s.y_axis = {0.005, 1.0, 200};
      break;
    case HeatmapMode::Beta1VsBeta2:
      s.x_axis = {0.0, 0.995, 200};
      s.y_axis = {0.0, -0.995, 200};
      break;
  }
  return s;
}

Heatmap heatmap_grid(const HeatmapSpec& spec, std::size_t threads) {
  Heatmap h;
  h.spec = spec;
  h.x_values = spec.x_axis.values();
  h.y_values = spec.y_axis.values();
  if (spec.mode == HeatmapMode::Beta1VsBeta2 && !std::isfinite(spec.fixed_eta_sigma))
    throw std::invalid_argument("fixed eta*sigma must be finite");
  const std::size_t rows = h.y_values.size(), cols = h.x_values.size();
  h.radius = Matrix(rows, cols);
  h.ratio = Matrix(rows, cols);
  h.diverges.assign(rows * cols, 0);
  // Rows write disjoint cells.
  parallel_for(rows, threads, [&](std::size_t r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double es = 0.0, b1 = 0.0, b2 = 0.0;
      switch (spec.mode) {
        case HeatmapMode::Beta1VsEtaSigma: b1 = h.x_values[c], es = h.y_values[r]; break;
        case HeatmapMode::Beta2VsEtaSigma: b2 = h.x_values[c], es = h.y_values[r]; break;
        case HeatmapMode::Beta1VsBeta2: b1 = h.x_values[c], b2 = h.y_values[r], es = spec.fixed_eta_sigma; break;
      }
      // eta1 = eta2 = 1 with sigma = eta sigma is the same block as eta1 = eta2 = eta.
      const double rho = momentum_spectral_radius(es, 1.0, 1.0, b1, b2);
      const double rho0 = momentum_spectral_radius(es, 1.0, 1.0, 0.0, 0.0);
      h.radius(r, c) = rho;
      h.ratio(r, c) = rho / rho0;
      h.diverges[r * cols + c] = rho >= 1.0 ? 1 : 0;
    }
  });
  return h;
}

}  // namespace extragrad
