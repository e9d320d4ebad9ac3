#include "extragrad/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace extragrad {

namespace r = regularizers;

namespace {

double center_at(const Vector& c, std::size_t i) { return c.empty() ? 0.0 : c[i]; }

void check_center(const Vector& c, std::size_t n) {
  if (!c.empty()) require_same_size(c.size(), n, "regularizer center");
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

ProxFunction::ProxFunction(Variant v) : v_(std::move(v)) {
  std::visit(overloaded{
                 [](const r::Zero&) {},
                 [](const r::SquaredL2& g) {
                   if (!(g.mu >= 0.0) || !std::isfinite(g.mu))
                     throw std::invalid_argument("squared_l2: mu must be finite and >= 0");
                   if (!all_finite(g.center)) throw std::invalid_argument("squared_l2: non-finite center");
                 },
                 [](const r::L1& g) {
                   if (!(g.lambda >= 0.0) || !std::isfinite(g.lambda))
                     throw std::invalid_argument("l1: lambda must be finite and >= 0");
                 },
                 [](const r::BallIndicator& g) {
                   if (!(g.radius > 0.0) || !std::isfinite(g.radius))
                     throw std::invalid_argument("ball: radius must be finite and > 0");
                   if (!all_finite(g.center)) throw std::invalid_argument("ball: non-finite center");
                 },
                 [](const r::BoxIndicator& g) {
                   require_same_size(g.lower.size(), g.upper.size(), "box bounds");
                   for (std::size_t i = 0; i < g.lower.size(); ++i)
                     if (!(g.lower[i] <= g.upper[i]))
                       throw std::invalid_argument(fmt::format("box: lower[{}] > upper[{}]", i, i));
                 },
             },
             v_);
}

ProxFunction ProxFunction::squared_l2(double mu, Vector center) {
  return ProxFunction(r::SquaredL2{mu, std::move(center)});
}
ProxFunction ProxFunction::l1(double lambda) { return ProxFunction(r::L1{lambda}); }
ProxFunction ProxFunction::ball(double radius, Vector center) {
  return ProxFunction(r::BallIndicator{radius, std::move(center)});
}
ProxFunction ProxFunction::box(Vector lower, Vector upper) {
  return ProxFunction(r::BoxIndicator{std::move(lower), std::move(upper)});
}

std::string ProxFunction::kind() const {
  return std::visit(overloaded{
                        [](const r::Zero&) { return std::string("zero"); },
                        [](const r::SquaredL2&) { return std::string("squared_l2"); },
                        [](const r::L1&) { return std::string("l1"); },
                        [](const r::BallIndicator&) { return std::string("ball"); },
                        [](const r::BoxIndicator&) { return std::string("box"); },
                    },
                    v_);
}

double ProxFunction::strong_convexity() const {
  if (const auto* g = std::get_if<r::SquaredL2>(&v_)) return g->mu;
  return 0.0;
}

bool ProxFunction::feasible(std::span<const double> x, double tol) const {
  if (const auto* g = std::get_if<r::BallIndicator>(&v_)) {
    check_center(g->center, x.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - center_at(g->center, i);
      s += d * d;
    }
    return std::sqrt(s) <= g->radius * (1.0 + tol) + tol;
  }
  if (const auto* g = std::get_if<r::BoxIndicator>(&v_)) {
    require_same_size(g->lower.size(), x.size(), "box");
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < g->lower[i] - tol || x[i] > g->upper[i] + tol) return false;
    return true;
  }
  return true;
}

double ProxFunction::value(std::span<const double> x) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(overloaded{
                        [](const r::Zero&) { return 0.0; },
                        [&](const r::SquaredL2& g) {
                          check_center(g.center, x.size());
                          double s = 0.0;
                          for (std::size_t i = 0; i < x.size(); ++i) {
                            const double d = x[i] - center_at(g.center, i);
                            s += d * d;
                          }
                          return 0.5 * g.mu * s;
                        },
                        [&](const r::L1& g) {
                          double s = 0.0;
                          for (double v : x) s += std::abs(v);
                          return g.lambda * s;
                        },
                        [&](const r::BallIndicator&) { return feasible(x, 1e-12) ? 0.0 : inf; },
                        [&](const r::BoxIndicator&) { return feasible(x, 1e-12) ? 0.0 : inf; },
                    },
                    v_);
}

void ProxFunction::prox(double eta, std::span<const double> v, std::span<double> out) const {
  if (!(eta > 0.0)) throw std::invalid_argument("prox: eta must be > 0");
  require_same_size(v.size(), out.size(), "prox");
  const std::size_t n = v.size();
  std::visit(overloaded{
                 [&](const r::Zero&) { std::copy(v.begin(), v.end(), out.begin()); },
                 [&](const r::SquaredL2& g) {
                   check_center(g.center, n);
                   const double em = eta * g.mu;
                   const double inv = 1.0 / (1.0 + em);
                   for (std::size_t i = 0; i < n; ++i) out[i] = (v[i] + em * center_at(g.center, i)) * inv;
                 },
                 [&](const r::L1& g) {
                   const double t = eta * g.lambda;
                   for (std::size_t i = 0; i < n; ++i) {
                     const double a = std::abs(v[i]) - t;
                     out[i] = a > 0.0 ? std::copysign(a, v[i]) : 0.0;
                   }
                 },
                 [&](const r::BallIndicator& g) {
                   check_center(g.center, n);
                   double s = 0.0;
                   for (std::size_t i = 0; i < n; ++i) {
                     const double d = v[i] - center_at(g.center, i);
                     s += d * d;
                   }
                   const double dist = std::sqrt(s);
                   const double f = dist > g.radius ? g.radius / dist : 1.0;
                   for (std::size_t i = 0; i < n; ++i) {
                     const double c = center_at(g.center, i);
                     out[i] = c + f * (v[i] - c);
                   }
                 },
                 [&](const r::BoxIndicator& g) {
                   require_same_size(g.lower.size(), n, "box");
                   for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(v[i], g.lower[i], g.upper[i]);
                 },
             },
             v_);
}

Vector ProxFunction::prox(double eta, std::span<const double> v) const {
  Vector out(v.size());
  prox(eta, v, out);
  return out;
}

bool operator==(const ProxFunction& a, const ProxFunction& b) {
  if (a.v_.index() != b.v_.index()) return false;
  return std::visit(overloaded{
                        [](const r::Zero&) { return true; },
                        [&](const r::SquaredL2& g) {
                          const auto& h = std::get<r::SquaredL2>(b.v_);
                          return g.mu == h.mu && g.center == h.center;
                        },
                        [&](const r::L1& g) { return g.lambda == std::get<r::L1>(b.v_).lambda; },
                        [&](const r::BallIndicator& g) {
                          const auto& h = std::get<r::BallIndicator>(b.v_);
                          return g.radius == h.radius && g.center == h.center;
                        },
                        [&](const r::BoxIndicator& g) {
                          const auto& h = std::get<r::BoxIndicator>(b.v_);
                          return g.lower == h.lower && g.upper == h.upper;
                        },
                    },
                    a.v_);
}

}  // namespace extragrad
