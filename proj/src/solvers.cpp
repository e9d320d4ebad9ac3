#include "extragrad/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "extragrad/kernels.hpp"

namespace extragrad {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void count(EvalCounters* c, std::size_t samples, std::size_t evals) {
  if (c == nullptr) return;
  c->samples += samples;
  c->evaluations += evals;
}

// out = prox_{eta g}(x - eta f)
void forward_prox(const ProxFunction& g, double eta, std::span<const double> x, std::span<const double> f,
                  std::span<double> out) {
  kernels::waxpy(out, x, -eta, f);
  g.prox(eta, out, out);
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(fmt::format("{} must be finite and > 0", name));
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::SegSame: return "seg_same";
    case Method::SegIndependent: return "seg_independent";
    case Method::Sgda: return "sgda";
    case Method::MomentumEg: return "momentum_eg";
    case Method::KStepEg: return "kstep_eg";
    case Method::Implicit: return "implicit";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view s) {
  for (Method m : {Method::SegSame, Method::SegIndependent, Method::Sgda, Method::MomentumEg, Method::KStepEg,
                   Method::Implicit})
    if (method_name(m) == s) return m;
  return std::nullopt;
}

void MethodConfig::validate() const {
  require_positive(eta1, "eta1");
  require_positive(eta2, "eta2");
  if (!(beta1 > -1.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 must lie in (-1, 1)");
  if (!(beta2 > -1.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 must lie in (-1, 1)");
  if (method == Method::KStepEg && k < 1) throw std::invalid_argument("k must be >= 1 for kstep_eg");
}

// ---------------------------------------------------------------------------

SegStepResult seg_same_step(const VIProblem& p, std::span<const double> x, double eta1, double eta2, Rng& rng,
                            EvalCounters* counters) {
  require_positive(eta1, "eta1");
  require_positive(eta2, "eta2");
  require_same_size(x.size(), p.dimension(), "iterate");
  const ComponentSample s = sample_component(p.op(), rng);
  const std::size_t d = x.size();
  Vector f(d);
  SegStepResult r{Vector(d), Vector(d), s.index};
  s.map->evaluate(x, f);
  forward_prox(p.regularizer(), eta1, x, f, r.y);
  s.map->evaluate(r.y, f);
  forward_prox(p.regularizer(), eta2, x, f, r.x_next);
  count(counters, 1, 2);
  return r;
}

SegIndependentResult seg_independent_step(const VIProblem& p, std::span<const double> x, double eta1,
                                          double eta2, Rng& rng, EvalCounters* counters) {
  require_positive(eta1, "eta1");
  require_positive(eta2, "eta2");
  require_same_size(x.size(), p.dimension(), "iterate");
  const ComponentSample sa = sample_component(p.op(), rng);
  const ComponentSample sb = sample_component(p.op(), rng);
  const std::size_t d = x.size();
  Vector f(d);
  SegIndependentResult r{Vector(d), Vector(d), sa.index, sb.index};
  sa.map->evaluate(x, f);
  forward_prox(p.regularizer(), eta1, x, f, r.y);
  sb.map->evaluate(r.y, f);
  forward_prox(p.regularizer(), eta2, x, f, r.x_next);
  count(counters, 2, 2);
  return r;
}

Vector sgda_step(const VIProblem& p, std::span<const double> x, double eta, Rng& rng, EvalCounters* counters) {
  require_positive(eta, "eta");
  require_same_size(x.size(), p.dimension(), "iterate");
  const ComponentSample s = sample_component(p.op(), rng);
  Vector f(x.size()), out(x.size());
  s.map->evaluate(x, f);
  forward_prox(p.regularizer(), eta, x, f, out);
  count(counters, 1, 1);
  return out;
}

MomentumStepResult momentum_eg_step(const VIProblem& p, std::span<const double> x,
                                    std::span<const double> x_prev, double eta1, double eta2, double beta1,
                                    double beta2, Rng& rng, EvalCounters* counters) {
  if (!p.regularizer().is_zero())
    throw std::invalid_argument("momentum_eg is defined for unregularized problems (g = zero) only");
  require_positive(eta1, "eta1");
  require_positive(eta2, "eta2");
  require_same_size(x.size(), p.dimension(), "iterate");
  require_same_size(x_prev.size(), p.dimension(), "previous iterate");
  const ComponentSample s = sample_component(p.op(), rng);
  const std::size_t d = x.size();
  Vector f(d);
  const Vector diff = subtract(x, x_prev);
  MomentumStepResult r{Vector(d), Vector(d), s.index};
  s.map->evaluate(x, f);
  kernels::waxpy(r.y, x, -eta1, f);
  // Zero momentum adds nothing; skipping keeps the step bitwise equal to plain EG.
  if (beta1 != 0.0) kernels::axpy(beta1, diff, r.y);
  s.map->evaluate(r.y, f);
  kernels::waxpy(r.x_next, x, -eta2, f);
  if (beta2 != 0.0) kernels::axpy(beta2, diff, r.x_next);
  count(counters, 1, 2);
  return r;
}

KStepResult kstep_eg_step(const VIProblem& p, std::span<const double> x, double eta, std::size_t k, Rng& rng,
                          EvalCounters* counters) {
  require_positive(eta, "eta");
  if (k < 1) throw std::invalid_argument("kstep_eg: k must be >= 1");
  require_same_size(x.size(), p.dimension(), "iterate");
  const ComponentSample s = sample_component(p.op(), rng);
  const std::size_t d = x.size();
  Vector f(d);
  Vector y(x.begin(), x.end());
  Vector next(d);
  for (std::size_t m = 0; m < k; ++m) {
    s.map->evaluate(y, f);
    forward_prox(p.regularizer(), eta, x, f, next);
    std::swap(y, next);
  }
  KStepResult r{std::move(y), Vector(d), s.index};
  s.map->evaluate(r.y_k, f);
  forward_prox(p.regularizer(), eta, x, f, r.x_next);
  count(counters, 1, k + 1);
  return r;
}

Vector implicit_step(const AffineComponent& f, const ProxFunction& g, std::span<const double> x, double eta,
                     double lipschitz) {
  require_positive(eta, "eta");
  const std::size_t d = x.size();
  require_same_size(d, f.c.size(), "implicit step");
  const bool direct = g.is_zero() || std::holds_alternative<regularizers::SquaredL2>(g.variant());
  if (direct) {
    // w = (x - eta (A w + c) + eta mu c_g) / (1 + eta mu)
    //  <=> ((1 + eta mu) I + eta A) w = x - eta c + eta mu c_g
    double mu = 0.0;
    const Vector* center = nullptr;
    if (const auto* sq = std::get_if<regularizers::SquaredL2>(&g.variant())) {
      mu = sq->mu;
      if (!sq->center.empty()) center = &sq->center;
    }
    Matrix m = eta * f.a;
    for (std::size_t i = 0; i < d; ++i) m(i, i) += 1.0 + eta * mu;
    Vector rhs(d);
    kernels::waxpy(rhs, x, -eta, f.c);
    if (center != nullptr) kernels::axpy(eta * mu, *center, rhs);
    Vector w = lu_solve(m, rhs);
    const double scale = std::max({1.0, norm(rhs), norm(w)});
    for (int refine = 0; refine < 3; ++refine) {
      Vector res = subtract(rhs, m * w);
      if (norm(res) <= 1e-14 * scale) break;
      kernels::axpy(1.0, lu_solve(m, res), w);
    }
    return w;
  }
  if (!(eta * lipschitz < 1.0)) {
    throw std::invalid_argument(
        fmt::format("implicit step by fixed point needs eta * L < 1 (got {:.6g})", eta * lipschitz));
  }
  Vector w(x.begin(), x.end());
  Vector fw(d), next(d);
  for (std::size_t it = 0; it < 10000; ++it) {
    f.evaluate(w, fw);
    forward_prox(g, eta, x, fw, next);
    const double change = std::sqrt(sq_distance(next, w));
    std::swap(w, next);
    if (change <= 1e-12 * std::max(1.0, norm(w))) return w;
  }
  throw ConvergenceError("implicit step: fixed-point iteration hit 10^4 iterations");
}

Vector implicit_step(const VIProblem& p, std::span<const double> x, double eta) {
  require_same_size(x.size(), p.dimension(), "iterate");
  if (p.op().deterministic()) {
    return implicit_step(p.op().component(0), p.regularizer(), x, eta, p.op().lipschitz());
  }
  const AffineComponent mean{p.op().mean_matrix(), p.op().mean_offset()};
  return implicit_step(mean, p.regularizer(), x, eta, p.op().lipschitz());
}

Vector implicit_step(const VIProblem& p, std::size_t component, std::span<const double> x, double eta) {
  require_same_size(x.size(), p.dimension(), "iterate");
  return implicit_step(p.op().component(component), p.regularizer(), x, eta,
                       p.op().component_lipschitz().at(component));
}

// ---------------------------------------------------------------------------

Vector IterState::ergodic_average() const {
  if (t == 0) return x;
  return scaled(1.0 / static_cast<double>(t), x_hat_sum);
}

namespace {

bool blown_up(double v) { return !std::isfinite(v) || v > kDivergenceThreshold; }

}  // namespace

RunRecord run(const VIProblem& p, const MethodConfig& cfg, std::span<const double> x0, const RunHooks& hooks) {
  cfg.validate();
  require_same_size(x0.size(), p.dimension(), "initial point");
  if (cfg.method == Method::MomentumEg && !p.regularizer().is_zero())
    throw std::invalid_argument("momentum_eg is defined for unregularized problems (g = zero) only");

  const auto start = std::chrono::steady_clock::now();
  const std::size_t d = p.dimension();
  Rng rng(cfg.seed);
  RunRecord rec;
  rec.config = cfg;
  rec.metrics.reserve(cfg.iterations + 1);

  IterState st{Vector(x0.begin(), x0.end()), Vector(x0.begin(), x0.end()), Vector(d, 0.0), 0};
  Vector fx(d);
  const std::optional<Vector>& sol = p.solution();

  auto measure = [&](bool final_point) {
    MetricPoint m;
    m.t = st.t;
    m.dist_sq = sol ? sq_distance(st.x, *sol) : kNaN;
    if (hooks.record_op_norm) {
      p.op().evaluate_full(st.x, fx);
      m.op_norm = norm(fx);
    } else {
      m.op_norm = kNaN;
    }
    m.gap = kNaN;
    if (hooks.gap && hooks.gap_stride > 0 && (st.t % hooks.gap_stride == 0 || final_point)) {
      m.gap = cfg.averaging && st.t > 0 ? hooks.gap(st.ergodic_average()) : hooks.gap(st.x);
    }
    return m;
  };

  rec.metrics.push_back(measure(cfg.iterations == 0));
  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    Vector y, next;
    switch (cfg.method) {
      case Method::SegSame: {
        auto r = seg_same_step(p, st.x, cfg.eta1, cfg.eta2, rng, &rec.counters);
        y = std::move(r.y);
        next = std::move(r.x_next);
        break;
      }
      case Method::SegIndependent: {
        auto r = seg_independent_step(p, st.x, cfg.eta1, cfg.eta2, rng, &rec.counters);
        y = std::move(r.y);
        next = std::move(r.x_next);
        break;
      }
      case Method::Sgda:
        next = sgda_step(p, st.x, cfg.eta1, rng, &rec.counters);
        y = st.x;
        break;
      case Method::MomentumEg: {
        auto r = momentum_eg_step(p, st.x, st.x_prev, cfg.eta1, cfg.eta2, cfg.beta1, cfg.beta2, rng,
                                  &rec.counters);
        y = std::move(r.y);
        next = std::move(r.x_next);
        break;
      }
      case Method::KStepEg: {
        auto r = kstep_eg_step(p, st.x, cfg.eta1, cfg.k, rng, &rec.counters);
        y = std::move(r.y_k);
        next = std::move(r.x_next);
        break;
      }
      case Method::Implicit: {
        const ComponentSample s = sample_component(p.op(), rng);
        next = implicit_step(p, s.index, st.x, cfg.eta1);
        rec.counters.samples += 1;
        rec.counters.evaluations += 1;
        y = next;
        break;
      }
    }
    if (cfg.averaging) kernels::axpy(1.0, y, st.x_hat_sum);
    st.x_prev = std::move(st.x);
    st.x = std::move(next);
    st.t = t + 1;
    const MetricPoint m = measure(t + 1 == cfg.iterations);
    rec.metrics.push_back(m);
    if (hooks.on_iteration) hooks.on_iteration(st);
    if ((sol && blown_up(m.dist_sq)) || (hooks.record_op_norm && blown_up(m.op_norm)) || !all_finite(st.x)) {
      rec.diverged = true;
      rec.diverged_at = st.t;
      break;
    }
  }
  rec.iterations_completed = st.t;
  rec.final_iterate = st.x;
  if (cfg.averaging) rec.ergodic_average = st.ergodic_average();
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

RunRecord run(const BilinearSaddle& p, const MethodConfig& cfg, std::span<const double> x0,
              const RunHooks& hooks) {
  return run(saddle_to_vi(p), cfg, x0, hooks);
}

double fit_per_step_factor(std::span<const double> series, double burn_fraction, double floor) {
  std::size_t end = 0;
  while (end < series.size() && std::isfinite(series[end]) && series[end] > floor) ++end;
  const auto begin = static_cast<std::size_t>(std::floor(burn_fraction * static_cast<double>(end)));
  if (end < begin + 2) return kNaN;
  const double n = static_cast<double>(end - begin);
  double st = 0.0, sl = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    st += static_cast<double>(i);
    sl += std::log(series[i]);
  }
  const double tm = st / n, lm = sl / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double dt = static_cast<double>(i) - tm;
    num += dt * (std::log(series[i]) - lm);
    den += dt * dt;
  }
  return std::exp(num / den);
}

// ---------------------------------------------------------------------------

NonconvexRun nonconvex_eg_run(const StochasticObjective& f, std::span<const double> x0, double eta,
                              std::size_t iterations, Rng& rng) {
  require_positive(eta, "eta");
  const std::size_t d = f.dimension();
  require_same_size(x0.size(), d, "initial point");
  const auto start = std::chrono::steady_clock::now();

  NonconvexRun out;
  out.record.config.method = Method::SegSame;
  out.record.config.label = "nonconvex_eg";
  out.record.config.eta1 = out.record.config.eta2 = eta;
  out.record.config.seed = rng.seed();
  out.record.config.iterations = iterations;
  out.grad_sq.reserve(iterations);

  Vector x(x0.begin(), x0.end()), y(d), g(d), full(d);
  auto push_metric = [&](std::size_t t) {
    f.gradient(x, full);
    const double gs = sq_norm(full);
    out.record.metrics.push_back({t, kNaN, std::sqrt(gs), kNaN});
    return gs;
  };

  double gs = push_metric(0);
  std::size_t t = 0;
  for (; t < iterations; ++t) {
    out.grad_sq.push_back(gs);
    if (!f.in_smooth_region(x)) out.left_smooth_region = true;
    const GradientSample s = f.draw(rng);
    f.stochastic_gradient(x, s, g);
    kernels::waxpy(y, x, -eta, g);
    f.stochastic_gradient(y, s, g);
    kernels::axpy(-eta, g, x);
    out.record.counters.samples += 1;
    out.record.counters.evaluations += 2;
    gs = push_metric(t + 1);
    if (blown_up(gs) || !all_finite(x)) {
      out.record.diverged = true;
      out.record.diverged_at = t + 1;
      ++t;
      break;
    }
  }
  out.record.iterations_completed = t;
  out.record.final_iterate = x;
  if (out.grad_sq.empty()) {
    out.min_grad_sq = out.mean_grad_sq = out.sampled_grad_sq = kNaN;
  } else {
    out.min_grad_sq = *std::min_element(out.grad_sq.begin(), out.grad_sq.end());
    double s = 0.0;
    for (double v : out.grad_sq) s += v;
    out.mean_grad_sq = s / static_cast<double>(out.grad_sq.size());
    out.sampled_index = rng.uniform_index(out.grad_sq.size());
    out.sampled_grad_sq = out.grad_sq[out.sampled_index];
  }
  out.record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace extragrad
