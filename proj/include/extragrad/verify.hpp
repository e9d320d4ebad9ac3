#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "extragrad/linalg.hpp"
#include "extragrad/problems.hpp"

namespace extragrad {

// ---------------------------------------------------------------------------
// Quadratic maximization over a ball

struct Ball {
  Vector center;
  double radius = 1.0;
};

struct BallMaximum {
  Vector argmax;
  double value = 0.0;
};

/// max over ||x - center|| <= R of 0.5 x^T P x + q^T x + k for symmetric P of
/// any inertia, solved exactly through the eigendecomposition of P and the
/// secular equation of the trust-region subproblem (hard case included).
BallMaximum maximize_quadratic_on_ball(const Matrix& p, std::span<const double> q, double k, const Ball& ball);

// ---------------------------------------------------------------------------
// Merit gap

struct GapEstimate {
  Vector x_hat;
  Ball ball;
  double gap = 0.0;
  Vector maximizer;
  bool closed_form = false;       // skew operator with g = zero
  double gradient_mapping = 0.0;  // ||x - P_ball(x + grad)|| at the maximizer
};

/// sup over the ball of g(x_hat) - g(x) + <F(x), x_hat - x> for the full
/// affine operator. Requires g = zero or squared_l2.
GapEstimate restricted_gap(const VIProblem& p, std::span<const double> x_hat, const Ball& ball);

/// Value of the gap objective at one probe point.
double gap_objective(const VIProblem& p, std::span<const double> x_hat, std::span<const double> x);

/// sup over the ball of (L^2/2)||x0 - x||^2 + sigma_x^2, exact.
BallMaximum ergodic_sup_term(const VIProblem& p, std::span<const double> x0, const Ball& ball);

// ---------------------------------------------------------------------------
// Reports

struct Checkpoint {
  std::string label;  // e.g. "t=100" or "etaL=0.5,k=3"
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool ok = true;
};

struct TheoremCheckReport {
  std::string id;
  std::string instance;
  std::string inequality;
  std::vector<Checkpoint> checkpoints;
  std::vector<std::pair<std::string, double>> measured;
  std::vector<std::string> notes;
  bool passed = true;
  std::size_t checked = 0;     // inequalities evaluated (may exceed checkpoints kept)
  std::size_t violations = 0;
  double worst_slack = 0.0;    // min over evaluated inequalities of rhs + tol - lhs
  double seconds = 0.0;

  /// Evaluates lhs <= rhs + tol, updates the verdict and slack statistics and
  /// keeps the checkpoint if keep is set or the inequality fails.
  bool record(std::string label, double lhs, double rhs, double tol, bool keep = true);
  /// Boolean assertion recorded as 0 <= 0 (pass) or 1 <= 0 (fail).
  bool require(std::string label, bool condition);
  void measure(std::string key, double value);
  void note(std::string text) { notes.push_back(std::move(text)); }

  /// One JSON object on one line.
  std::string to_json() const;
};

/// Fixed-width table, one row per report.
std::string summary_table(const std::vector<TheoremCheckReport>& reports);

// ---------------------------------------------------------------------------
// Checks. Option defaults are the acceptance settings.

struct Theorem1Options {
  std::size_t instances = 100;
  std::size_t dim = 8;
  std::vector<double> eta_l{0.1, 0.5, 0.9};
  std::size_t k_max = 5;
  std::uint64_t seed = 1;
};
TheoremCheckReport check_theorem1(const Theorem1Options& o = {});

struct Theorem2Options {
  std::size_t dim = 8;
  std::size_t components = 10;
  double mu = 0.5;
  double noise_scale = 1.0;
  double eta_times_l = 0.5;
  std::size_t iterations = 2000;       // noisy regime
  std::size_t exact_iterations = 10000;  // zero-noise regime
  std::size_t seeds = 100;
  std::uint64_t seed = 2;
  std::size_t threads = 0;
};
TheoremCheckReport check_theorem2(const Theorem2Options& o = {});

struct Theorem3Options {
  std::size_t dim = 6;
  std::size_t components = 5;
  double radius = 10.0;
  std::vector<std::size_t> horizons{100, 1000, 10000};
  std::size_t seeds = 30;
  double max_constant = 4.0;
  std::uint64_t seed = 3;
  std::size_t threads = 0;
};
TheoremCheckReport check_theorem3(const Theorem3Options& o = {});

struct Theorem4Options {
  std::size_t instances = 50;
  std::size_t max_dim = 20;
  std::size_t iterations = 20000;
  double rate_tolerance = 1e-3;
  std::uint64_t seed = 4;
  std::size_t threads = 0;
};
TheoremCheckReport check_theorem4(const Theorem4Options& o = {});

struct Theorem5Options {
  std::size_t dim = 5;
  std::size_t components = 10;
  double quartic_noise = 0.5;
  std::vector<std::size_t> horizons{100, 1000, 10000};
  std::size_t seeds = 50;
  double slope_target = -0.5;
  double slope_tolerance = 0.15;
  std::uint64_t seed = 5;
  std::size_t threads = 0;
};
TheoremCheckReport check_theorem5(const Theorem5Options& o = {});

struct Lemma1Options {
  std::size_t trials = 200;
  std::size_t dim = 5;
  std::uint64_t seed = 6;
};
TheoremCheckReport check_lemma1(const Lemma1Options& o = {});

/// Firm nonexpansiveness of every prox variant plus sampled monotonicity and
/// Lipschitz bounds of every component of random operators.
TheoremCheckReport check_operator_properties(const Lemma1Options& o = {});

struct Fig1Options {
  std::size_t dim = 20;
  std::size_t components = 10;
  std::size_t iterations = 10000;
  double beta2 = -0.3;
  std::uint64_t seed = 7;
};
TheoremCheckReport check_fig1(const Fig1Options& o = {});

struct MomentumOptions {
  std::size_t draws = 20;
  std::size_t iterations = 5000;
  double radius_cap = 0.99;
  double tolerance = 1e-2;
  std::uint64_t seed = 8;
};
/// Momentum runs against block spectral radii, plus heatmap invariants.
TheoremCheckReport check_momentum(const MomentumOptions& o = {});

/// Suite names: theorem1..theorem5, lemma1, operator_properties, fig1, momentum, all.
const std::vector<std::string>& suite_names();
bool is_suite(std::string_view name);
std::vector<TheoremCheckReport> run_suite(std::string_view name, std::size_t threads = 0);

}  // namespace extragrad
