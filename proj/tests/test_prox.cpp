#include <doctest.h>

#include <cmath>
#include <limits>

#include "extragrad/prox.hpp"
#include "extragrad/rng.hpp"

using namespace extragrad;

TEST_SUITE("prox") {
  TEST_CASE("closed-form proximal points") {
    CHECK(ProxFunction::zero().prox(0.7, Vector{3, -1}) == Vector{3, -1});
    const Vector sq = ProxFunction::squared_l2(1.0).prox(1.0, Vector{2, 4});
    CHECK(sq[0] == doctest::Approx(1.0));
    CHECK(sq[1] == doctest::Approx(2.0));
    // (v + eta mu c) / (1 + eta mu) with mu = 2, eta = 0.5, c = (1, 1).
    const Vector sqc = ProxFunction::squared_l2(2.0, Vector{1, 1}).prox(0.5, Vector{3, -1});
    CHECK(sqc[0] == doctest::Approx(2.0));
    CHECK(sqc[1] == doctest::Approx(0.0));
    const Vector ball = ProxFunction::ball(1.0).prox(0.3, Vector{3, 4});
    CHECK(ball[0] == doctest::Approx(0.6));
    CHECK(ball[1] == doctest::Approx(0.8));
    CHECK(ProxFunction::ball(1.0).prox(0.3, Vector{0.3, 0.4}) == Vector{0.3, 0.4});
    const Vector l1 = ProxFunction::l1(1.0).prox(0.5, Vector{2, -0.2, -3});
    CHECK(l1[0] == doctest::Approx(1.5));
    CHECK(l1[1] == 0.0);
    CHECK(l1[2] == doctest::Approx(-2.5));
    CHECK(ProxFunction::box(Vector{0, 0}, Vector{1, 2}).prox(1.0, Vector{-1, 5}) == Vector{0, 2});
  }

  TEST_CASE("strong convexity and values") {
    CHECK(ProxFunction::squared_l2(0.4).strong_convexity() == 0.4);
    CHECK(ProxFunction::l1(2.0).strong_convexity() == 0.0);
    CHECK(ProxFunction::ball(1.0).strong_convexity() == 0.0);
    CHECK(ProxFunction::l1(2.0).value(Vector{1, -2}) == doctest::Approx(6.0));
    CHECK(ProxFunction::ball(1.0).value(Vector{0.5, 0}) == 0.0);
    CHECK(std::isinf(ProxFunction::ball(1.0).value(Vector{2, 0})));
    CHECK(ProxFunction::squared_l2(2.0, Vector{1, 0}).value(Vector{0, 1}) == doctest::Approx(2.0));
  }

  TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(ProxFunction::squared_l2(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(ProxFunction::l1(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(ProxFunction::ball(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ProxFunction::box(Vector{1}, Vector{0}), std::invalid_argument);
  }

  TEST_CASE("prox minimizes eta g(u) + 0.5 ||u - v||^2 against random probes") {
    Rng rng(21);
    const std::vector<ProxFunction> gs{ProxFunction::zero(), ProxFunction::squared_l2(0.7, Vector{0.2, -0.1, 0.0}),
                                       ProxFunction::l1(0.9), ProxFunction::ball(1.5, Vector{0.1, 0.2, 0.3}),
                                       ProxFunction::box(Vector{-1, -0.5, 0}, Vector{1, 0.5, 2})};
    for (const ProxFunction& g : gs) {
      CAPTURE(g.kind());
      for (int trial = 0; trial < 50; ++trial) {
        const double eta = rng.uniform(0.05, 3.0);
        const Vector v{2 * rng.normal(), 2 * rng.normal(), 2 * rng.normal()};
        const Vector z = g.prox(eta, v);
        auto objective = [&](const Vector& u) {
          double s = 0.0;
          for (std::size_t i = 0; i < u.size(); ++i) s += 0.5 * (u[i] - v[i]) * (u[i] - v[i]);
          return eta * g.value(u) + s;
        };
        const double best = objective(z);
        REQUIRE(std::isfinite(best));
        for (int p = 0; p < 20; ++p) {
          Vector u = z;
          for (double& x : u) x += 0.1 * rng.normal();
          CHECK(objective(u) >= best - 1e-12);
        }
      }
    }
  }

  TEST_CASE("prox may alias its input") {
    const ProxFunction g = ProxFunction::l1(1.0);
    Vector v{2, -0.5};
    g.prox(1.0, v, v);
    CHECK(v == Vector{1, 0});
  }
}
