#pragma once

#include <span>
#include <string>
#include <variant>

#include "extragrad/linalg.hpp"

namespace extragrad {

namespace regularizers {
struct Zero {};
/// (mu/2) ||x - center||^2; empty center means the origin.
struct SquaredL2 {
  double mu = 0.0;
  Vector center;
};
/// lambda ||x||_1
struct L1 {
  double lambda = 0.0;
};
/// Indicator of the Euclidean ball ||x - center|| <= radius.
struct BallIndicator {
  double radius = 1.0;
  Vector center;
};
/// Indicator of the box lower <= x <= upper (componentwise).
struct BoxIndicator {
  Vector lower;
  Vector upper;
};
}  // namespace regularizers

/// The regularizer g of the variational inequality, with exact proximal maps.
class ProxFunction {
 public:
  using Variant = std::variant<regularizers::Zero, regularizers::SquaredL2, regularizers::L1,
                               regularizers::BallIndicator, regularizers::BoxIndicator>;

  ProxFunction() = default;
  ProxFunction(Variant v);  // validates parameters

  static ProxFunction zero() { return {}; }
  static ProxFunction squared_l2(double mu, Vector center = {});
  static ProxFunction l1(double lambda);
  static ProxFunction ball(double radius, Vector center = {});
  static ProxFunction box(Vector lower, Vector upper);

  const Variant& variant() const { return v_; }
  std::string kind() const;

  /// Strong-convexity modulus: mu for SquaredL2, zero otherwise.
  double strong_convexity() const;

  /// g(x); +infinity outside the set for indicator variants.
  double value(std::span<const double> x) const;

  /// True where g is finite.
  bool feasible(std::span<const double> x, double tol = 0.0) const;

  /// argmin_u  eta g(u) + 0.5 ||u - v||^2, written into out (may alias v).
  void prox(double eta, std::span<const double> v, std::span<double> out) const;
  Vector prox(double eta, std::span<const double> v) const;

  bool is_zero() const { return std::holds_alternative<regularizers::Zero>(v_); }

  friend bool operator==(const ProxFunction& a, const ProxFunction& b);

 private:
  Variant v_;
};

}  // namespace extragrad
