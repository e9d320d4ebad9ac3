#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>

#include "extragrad/verify.hpp"
#include "test_helpers.hpp"

using namespace extragrad;
using testing::from_eigen;
using testing::to_eigen;

namespace {

double quad_value(const Eigen::MatrixXd& p, const Eigen::VectorXd& q, double k, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(p * x) + q.dot(x) + k;
}

Eigen::VectorXd random_unit(std::size_t d, Rng& rng) {
  Eigen::VectorXd u(static_cast<Eigen::Index>(d));
  for (auto& v : u) v = rng.normal();
  return u / u.norm();
}

// Best value over boundary samples and an interior grid of a 2-D ball.
double brute_force_2d(const Eigen::MatrixXd& p, const Eigen::VectorXd& q, double k, const Eigen::Vector2d& c, double r) {
  double best = -INFINITY;
  for (int i = 0; i < 100000; ++i) {
    const double th = 2 * std::numbers::pi * i / 100000.0;
    best = std::max(best, quad_value(p, q, k, c + r * Eigen::Vector2d(std::cos(th), std::sin(th))));
  }
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j <= 400; ++j) {
      const Eigen::Vector2d u(-1 + 2 * i / 400.0, -1 + 2 * j / 400.0);
      if (u.norm() <= 1) best = std::max(best, quad_value(p, q, k, c + r * u));
    }
  return best;
}

// Multi-start projected gradient ascent.
double projected_ascent(const Eigen::MatrixXd& p, const Eigen::VectorXd& q, double k, const Eigen::VectorXd& c,
                        double r, Rng& rng) {
  const double step = 0.5 / std::max(1.0, p.cwiseAbs().rowwise().sum().maxCoeff());
  double best = -INFINITY;
  for (int s = 0; s < 20; ++s) {
    Eigen::VectorXd x = c + r * random_unit(static_cast<std::size_t>(c.size()), rng);
    for (int it = 0; it < 5000; ++it) {
      x += step * (p * x + q);
      const Eigen::VectorXd dx = x - c;
      if (dx.norm() > r) x = c + dx * (r / dx.norm());
    }
    best = std::max(best, quad_value(p, q, k, x));
  }
  return best;
}

Eigen::MatrixXd random_symmetric(std::size_t d, Rng& rng) {
  const Eigen::MatrixXd g = to_eigen(gaussian_matrix(d, d, rng));
  return 0.5 * (g + g.transpose());
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("ball quadratic maximum against brute force in two dimensions") {
    Rng rng(51);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd p = random_symmetric(2, rng);
      const Eigen::VectorXd q = to_eigen(gaussian_vector(2, rng));
      const Eigen::Vector2d c = to_eigen(gaussian_vector(2, rng));
      const double r = rng.uniform(0.2, 2.0), k = rng.normal();
      const BallMaximum m =
          maximize_quadratic_on_ball(testing::from_eigen_matrix(p), from_eigen(q), k, {from_eigen(c), r});
      const double ref = brute_force_2d(p, q, k, c, r);
      CHECK(m.value >= ref - 1e-10);
      CHECK(m.value - ref <= 1e-6 * std::max(1.0, std::abs(ref)));
      CHECK((to_eigen(m.argmax) - c).norm() <= r * (1 + 1e-12));
      CHECK(quad_value(p, q, k, to_eigen(m.argmax)) == doctest::Approx(m.value).epsilon(1e-12));
    }
  }

  TEST_CASE("ball quadratic maximum against projected ascent") {
    Rng rng(52);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t d = 3 + rng.uniform_index(4);
      const Eigen::MatrixXd p = random_symmetric(d, rng);
      const Eigen::VectorXd q = to_eigen(gaussian_vector(d, rng));
      const Eigen::VectorXd c = to_eigen(gaussian_vector(d, rng));
      const double r = rng.uniform(0.5, 2.0);
      const BallMaximum m = maximize_quadratic_on_ball(testing::from_eigen_matrix(p), from_eigen(q), 0.0, {from_eigen(c), r});
      const double ref = projected_ascent(p, q, 0.0, c, r, rng);
      CHECK(m.value >= ref - 1e-9 * std::max(1.0, std::abs(ref)));
    }
  }

  TEST_CASE("hard case of the trust-region subproblem") {
    // max x1^2 + 0.5 x2^2 + 0.5 x2 on the unit disc: x2 = 0.5, x1 = +-sqrt(0.75), value 1.125.
    const Matrix p{{2.0, 0.0}, {0.0, 1.0}};
    const BallMaximum m = maximize_quadratic_on_ball(p, Vector{0.0, 0.5}, 0.0, {Vector{0.0, 0.0}, 1.0});
    CHECK(m.value == doctest::Approx(1.125).epsilon(1e-12));
    CHECK(m.argmax[1] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::abs(m.argmax[0]) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-10));

    // Concave objective with its maximizer strictly inside.
    const Matrix n{{-2.0, 0.0}, {0.0, -4.0}};
    const BallMaximum in = maximize_quadratic_on_ball(n, Vector{0.2, 0.4}, 1.0, {Vector{0.0, 0.0}, 1.0});
    CHECK(in.argmax[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(in.argmax[1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(in.value == doctest::Approx(1.0 + 0.5 * (0.2 * 0.1 + 0.4 * 0.1)).epsilon(1e-12));
  }

  TEST_CASE("restricted gap on a skew problem uses the closed form") {
    Rng rng(53);
    for (int trial = 0; trial < 10; ++trial) {
      const VIProblem p = saddle_to_vi(BilinearSaddle(gaussian_matrix(3, 3, rng), gaussian_vector(3, rng), gaussian_vector(3, rng)));
      const Vector xh = gaussian_vector(6, rng), c = gaussian_vector(6, rng);
      const double r = rng.uniform(0.5, 3.0);
      const GapEstimate g = restricted_gap(p, xh, {c, r});
      CHECK(g.closed_form);
      // Linear in x for skew A: sup = phi(center) + R ||A^T x_hat - c||.
      const Eigen::MatrixXd a = to_eigen(p.op().mean_matrix());
      const Eigen::VectorXd cv = to_eigen(p.op().mean_offset());
      const Eigen::VectorXd xe = to_eigen(xh), ce = to_eigen(c);
      const double at_center = (a * ce + cv).dot(xe - ce);
      const double ref = at_center + r * (a.transpose() * xe - cv).norm();
      CHECK(g.gap == doctest::Approx(ref).epsilon(1e-11));
      CHECK(gap_objective(p, xh, g.maximizer) == doctest::Approx(g.gap).epsilon(1e-11));
      CHECK(g.gradient_mapping <= 1e-9 * std::max(1.0, std::abs(ref)));
      const BallMaximum general = maximize_quadratic_on_ball(Matrix(6, 6), from_eigen(a.transpose() * xe - cv),
                                                             cv.dot(xe), {c, r});
      CHECK(general.value == doctest::Approx(g.gap).epsilon(1e-10));
      for (int s = 0; s < 200; ++s) {
        const Vector probe = from_eigen(ce + r * random_unit(6, rng));
        CHECK(gap_objective(p, xh, probe) <= g.gap + 1e-10);
      }
    }
  }

  TEST_CASE("restricted gap on a strongly monotone problem") {
    Rng rng(54);
    StronglyMonotoneOptions o;
    o.op.dim = 4;
    o.op.components = 3;
    o.mu = 0.7;
    const VIProblem p = strongly_monotone_vi(o, rng);
    const Vector xs = *p.solution();
    const GapEstimate at_solution = restricted_gap(p, xs, {xs, 1.0});
    CHECK_FALSE(at_solution.closed_form);
    CHECK(std::abs(at_solution.gap) <= 1e-10);
    const Vector xh = add(xs, gaussian_vector(4, rng, 0.5));
    const GapEstimate g = restricted_gap(p, xh, {xs, 1.5});
    CHECK(g.gap > 0.0);
    for (int s = 0; s < 2000; ++s) {
      const Vector probe = from_eigen(to_eigen(xs) + 1.5 * rng.uniform01() * random_unit(4, rng));
      CHECK(gap_objective(p, xh, probe) <= g.gap + 1e-10);
    }
    CHECK_THROWS(restricted_gap(VIProblem(p.op(), ProxFunction::l1(0.1)), xh, {xs, 1.0}));
  }

  TEST_CASE("ergodic sup term against boundary samples") {
    Rng rng(55);
    MonotoneAffineOptions o;
    o.dim = 3;
    o.components = 4;
    const VIProblem p(random_monotone_affine(o, rng), ProxFunction::zero());
    const Vector x0 = gaussian_vector(3, rng), c = gaussian_vector(3, rng);
    const double r = 2.0;
    const BallMaximum m = ergodic_sup_term(p, x0, {c, r});
    const double l = p.op().lipschitz();
    double best = 0.0;
    for (int s = 0; s < 10000; ++s) {
      const Vector x = from_eigen(to_eigen(c) + r * random_unit(3, rng));
      best = std::max(best, 0.5 * l * l * sq_distance(x0, x) + p.op().variance_at(x));
    }
    CHECK(m.value >= best - 1e-10);
    CHECK(m.value <= best * 1.01);
  }

  TEST_CASE("report record semantics and serialization") {
    TheoremCheckReport r;
    r.id = "demo";
    CHECK(r.record("a", 1.0, 2.0, 0.0));
    CHECK(r.worst_slack == 1.0);
    CHECK_FALSE(r.record("b", 3.0, 2.0, 0.5));
    CHECK(r.worst_slack == -0.5);
    CHECK(r.record("quiet", 0.0, 1.0, 0.0, false));
    CHECK_FALSE(r.record("nan", NAN, 1.0, 0.0, false));
    CHECK_FALSE(r.require("flag", false));
    r.measure("x", 2.5);
    CHECK_FALSE(r.passed);
    CHECK(r.checked == 5);
    CHECK(r.violations == 3);
    CHECK(r.checkpoints.size() == 4);  // "quiet" is dropped, failures are kept
    const auto j = nlohmann::json::parse(r.to_json());
    CHECK(j["id"] == "demo");
    CHECK(j["verdict"] == "fail");
    CHECK(j["measured"]["x"] == 2.5);
    CHECK(j["checkpoints"].size() == 4);
    const std::string table = summary_table({r});
    CHECK(table.find("demo") != std::string::npos);
    CHECK(table.find("FAIL") != std::string::npos);
  }

  TEST_CASE("checks pass at reduced sizes") {
    CHECK(check_theorem1({.instances = 5, .dim = 4, .eta_l = {0.3, 0.8}, .k_max = 3, .seed = 11}).passed);
    CHECK(check_lemma1({.trials = 20, .dim = 3, .seed = 12}).passed);
    CHECK(check_operator_properties({.trials = 20, .dim = 3, .seed = 13}).passed);
    CHECK(check_theorem4({.instances = 4, .max_dim = 6, .iterations = 5000, .rate_tolerance = 1e-3, .seed = 14}).passed);
    CHECK(check_momentum({.draws = 3, .iterations = 3000, .radius_cap = 0.99, .tolerance = 1e-2, .seed = 15}).passed);
  }

  TEST_CASE("suite registry") {
    const auto& names = suite_names();
    for (const char* n : {"theorem1", "theorem2", "theorem3", "theorem4", "theorem5", "lemma1",
                          "operator_properties", "fig1", "momentum", "all"}) {
      CHECK(std::find(names.begin(), names.end(), n) != names.end());
      CHECK(is_suite(n));
    }
    CHECK_FALSE(is_suite("theorem6"));
    CHECK_THROWS_AS(run_suite("theorem6"), std::invalid_argument);
    const auto reports = run_suite("lemma1");
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].passed);
    CHECK(reports[0].seconds >= 0.0);
  }
}
