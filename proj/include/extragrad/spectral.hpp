#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "extragrad/linalg.hpp"

namespace extragrad {

/// Exact per-iteration rate of two-stepsize extragradient on a bilinear
/// problem. per_step_sq_factor multiplies ||z^t - z*||^2 once per iteration.
struct SpectralReport {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double per_step_sq_factor = 1.0;
  int preset = 0;                 // 1 or 2 for the named stepsize presets, 0 otherwise
  double corollary_bound = 0.0;   // (1 - kappa/6)^2 or (1 - kappa/4)^2 for presets, NaN otherwise
  bool converges = false;         // per_step_sq_factor < 1
  bool preconditions_ok = false;  // eta2 < 1/sigma_max and eta1 eta2 < 2/sigma_max^2

  double kappa() const { return sigma_max > 0 ? sigma_min * sigma_min / (sigma_max * sigma_max) : 0.0; }
};

/// (1 - eta1 eta2 s^2)^2 + eta2^2 s^2 for one singular value s.
double eg_sq_factor_at(double sigma, double eta1, double eta2);

/// Maximum of eg_sq_factor_at over [sigma_min, sigma_max]: both endpoints plus
/// the interior critical point when it falls inside. Throws on negative inputs.
SpectralReport eg_contraction_factor(double sigma_max, double sigma_min, double eta1, double eta2);
SpectralReport eg_contraction_factor(const Matrix& b, double eta1, double eta2);

struct Stepsizes {
  double eta1 = 0.0;
  double eta2 = 0.0;
};

/// Preset 1: eta1 = eta2 = 1/(sqrt2 sigma_max).
/// Preset 2: eta1 = kappa/(sqrt2 sigma_max^2), eta2 = 1/(sqrt2 kappa sigma_max^2).
/// Preset 2 throws std::domain_error when sigma_min = 0.
Stepsizes corollary_stepsizes(double sigma_max, double sigma_min, int preset);
Stepsizes corollary_stepsizes(const Matrix& b, int preset);

/// Report at a preset, with corollary_bound filled in.
SpectralReport corollary_report(double sigma_max, double sigma_min, int preset);
SpectralReport corollary_report(const Matrix& b, int preset);

/// 4x4 per-singular-value block of momentum extragradient acting on
/// (x^t, y^t, x^{t-1}, y^{t-1}) - z* in singular coordinates.
struct MomentumBlock {
  double sigma = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  Matrix matrix;
};

MomentumBlock momentum_block(double sigma, double eta1, double eta2, double beta1, double beta2);

/// Spectral radius of the block. The block is the real form of the complex
/// recursion w+ = p w + q w_prev with p = 1 + beta2 - eta1 eta2 s^2 + i eta2 (1 + beta1) s
/// and q = -beta2 - i eta2 beta1 s, so its eigenvalues are the roots of
/// l^2 - p l - q and their conjugates.
double momentum_spectral_radius(double sigma, double eta1, double eta2, double beta1, double beta2);
double momentum_spectral_radius(const MomentumBlock& block);

enum class HeatmapMode { Beta1VsEtaSigma, Beta2VsEtaSigma, Beta1VsBeta2 };

std::string heatmap_mode_name(HeatmapMode m);
std::optional<HeatmapMode> parse_heatmap_mode(std::string_view s);

/// Inclusive linear grid lo .. hi with steps points (steps >= 2).
struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t steps = 200;

  Vector values() const;
};

/// Columns follow x_axis, rows follow y_axis.
///   Beta1VsEtaSigma: x = beta1, y = eta sigma, beta2 = 0
///   Beta2VsEtaSigma: x = beta2, y = eta sigma, beta1 = 0
///   Beta1VsBeta2:    x = beta1, y = beta2, eta sigma fixed
/// eta1 = eta2 throughout, so a cell depends on eta sigma only.
struct HeatmapSpec {
  HeatmapMode mode = HeatmapMode::Beta2VsEtaSigma;
  GridAxis x_axis;
  GridAxis y_axis;
  double fixed_eta_sigma = 0.01;

  /// Default 200 x 200 grids for each mode.
  static HeatmapSpec defaults(HeatmapMode mode);
};

struct Heatmap {
  HeatmapSpec spec;
  Vector x_values;
  Vector y_values;
  Matrix radius;                   // rho(T(cell))
  Matrix ratio;                    // rho(T(cell)) / rho(T(cell with beta1 = beta2 = 0))
  std::vector<std::uint8_t> diverges;  // row-major, 1 where rho >= 1

  bool diverges_at(std::size_t row, std::size_t col) const { return diverges[row * x_values.size() + col] != 0; }
};

/// Throws std::invalid_argument on non-finite bounds or steps < 2. Rows are
/// evaluated on up to threads workers; the result does not depend on it.
Heatmap heatmap_grid(const HeatmapSpec& spec, std::size_t threads = 1);

}  // namespace extragrad
