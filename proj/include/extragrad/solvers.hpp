#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "extragrad/linalg.hpp"
#include "extragrad/objectives.hpp"
#include "extragrad/problems.hpp"
#include "extragrad/rng.hpp"

namespace extragrad {

enum class Method { SegSame, SegIndependent, Sgda, MomentumEg, KStepEg, Implicit };

std::string method_name(Method m);
/// Parses "seg_same", "seg_independent", "sgda", "momentum_eg", "kstep_eg", "implicit".
std::optional<Method> parse_method(std::string_view s);

/// Single-stepsize methods (sgda, kstep_eg, implicit) use eta1.
struct MethodConfig {
  Method method = Method::SegSame;
  std::string label;        // free-form name used in outputs; defaults to method_name
  double eta1 = 0.1;        // extrapolation stepsize
  double eta2 = 0.1;        // update stepsize
  double beta1 = 0.0;       // momentum in the extrapolation step
  double beta2 = 0.0;       // momentum in the update step
  std::size_t k = 1;        // extrapolation depth for KStepEg
  std::uint64_t seed = 0;
  std::size_t iterations = 1000;
  bool averaging = false;   // maintain the ergodic average of the y^t

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  std::string display_name() const { return label.empty() ? method_name(method) : label; }

  friend bool operator==(const MethodConfig&, const MethodConfig&) = default;
};

/// Instrumented counts of sampled indices and component evaluations.
struct EvalCounters {
  std::size_t samples = 0;
  std::size_t evaluations = 0;
};

struct SegStepResult {
  Vector y;
  Vector x_next;
  std::size_t sample;
};

struct SegIndependentResult {
  Vector y;
  Vector x_next;
  std::size_t sample_a;
  std::size_t sample_b;
};

struct MomentumStepResult {
  Vector y;
  Vector x_next;
  std::size_t sample;
};

struct KStepResult {
  Vector y_k;
  Vector x_next;
  std::size_t sample;
};

/// One xi; y = prox_{eta1 g}(x - eta1 F(x; xi)), x+ = prox_{eta2 g}(x - eta2 F(y; xi)).
SegStepResult seg_same_step(const VIProblem& p, std::span<const double> x, double eta1, double eta2, Rng& rng,
                            EvalCounters* counters = nullptr);

/// As seg_same_step, but the update uses a second, independent sample.
SegIndependentResult seg_independent_step(const VIProblem& p, std::span<const double> x, double eta1,
                                          double eta2, Rng& rng, EvalCounters* counters = nullptr);

/// x+ = prox_{eta g}(x - eta F(x; xi)).
Vector sgda_step(const VIProblem& p, std::span<const double> x, double eta, Rng& rng,
                 EvalCounters* counters = nullptr);

/// y = x - eta1 F(x; xi) + beta1 (x - x_prev), x+ = x - eta2 F(y; xi) + beta2 (x - x_prev).
/// Defined for g = Zero only.
MomentumStepResult momentum_eg_step(const VIProblem& p, std::span<const double> x,
                                    std::span<const double> x_prev, double eta1, double eta2, double beta1,
                                    double beta2, Rng& rng, EvalCounters* counters = nullptr);

/// y_0 = x, y_{m+1} = prox_{eta g}(x - eta F(y_m; xi)) for m < k, and
/// x+ = prox_{eta g}(x - eta F(y_k; xi)); one xi, k + 1 evaluations.
KStepResult kstep_eg_step(const VIProblem& p, std::span<const double> x, double eta, std::size_t k, Rng& rng,
                          EvalCounters* counters = nullptr);

/// Implicit update w = prox_{eta g}(x - eta F(w)) for the full operator.
Vector implicit_step(const VIProblem& p, std::span<const double> x, double eta);
/// Same for the single component F(.; i).
Vector implicit_step(const VIProblem& p, std::size_t component, std::span<const double> x, double eta);
/// Same for an explicit affine map.
Vector implicit_step(const AffineComponent& f, const ProxFunction& g, std::span<const double> x, double eta,
                     double lipschitz);

/// Iterate state of a run.
struct IterState {
  Vector x;
  Vector x_prev;
  Vector x_hat_sum;  // running sum of the y^k
  std::size_t t = 0;

  Vector ergodic_average() const;
};

struct MetricPoint {
  std::size_t t = 0;
  double dist_sq = 0.0;  // NaN when no solution is known
  double op_norm = 0.0;  // ||F(x^t)||
  double gap = 0.0;      // NaN unless a gap hook ran at this t
};

struct RunHooks {
  /// Merit gap evaluated at checkpoints on the ergodic average
  /// (or on x^t when averaging is off).
  std::function<double(std::span<const double>)> gap;
  std::size_t gap_stride = 0;  // 0 disables; otherwise every gap_stride iterations and at the end
  std::function<void(const IterState&)> on_iteration;
  bool record_op_norm = true;
};

struct RunRecord {
  MethodConfig config;
  std::vector<MetricPoint> metrics;  // t = 0 .. iterations_completed
  std::size_t iterations_completed = 0;
  bool diverged = false;
  std::optional<std::size_t> diverged_at;
  double wall_seconds = 0.0;
  Vector final_iterate;
  Vector ergodic_average;  // empty unless averaging was on
  EvalCounters counters;
};

/// Divergence is flagged (and the run stopped) once a metric exceeds this or is non-finite.
inline constexpr double kDivergenceThreshold = 1e12;

/// Iterates cfg.method for cfg.iterations from x0 with Rng(cfg.seed).
RunRecord run(const VIProblem& p, const MethodConfig& cfg, std::span<const double> x0,
              const RunHooks& hooks = {});
RunRecord run(const BilinearSaddle& p, const MethodConfig& cfg, std::span<const double> x0,
              const RunHooks& hooks = {});

/// Least-squares slope of log(series) over the tail of the usable range,
/// returned as exp(slope): the per-step multiplier of the series. Entries at
/// or below floor (and everything after the first one) are discarded, then
/// the first burn_fraction of the remaining window.
double fit_per_step_factor(std::span<const double> series, double burn_fraction = 0.5, double floor = 1e-280);

struct NonconvexRun {
  RunRecord record;           // op_norm column holds ||grad f(x^t)||
  Vector grad_sq;             // ||grad f(x^k)||^2 for k = 0 .. T-1
  double min_grad_sq = 0.0;
  double mean_grad_sq = 0.0;  // E over a uniform index, i.e. the trajectory average
  double sampled_grad_sq = 0.0;
  std::size_t sampled_index = 0;
  bool left_smooth_region = false;
};

/// Stochastic extragradient on min f: y = x - eta grad f(x; xi), x+ = x - eta grad f(y; xi).
NonconvexRun nonconvex_eg_run(const StochasticObjective& f, std::span<const double> x0, double eta,
                              std::size_t iterations, Rng& rng);

}  // namespace extragrad
