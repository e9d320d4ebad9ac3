#include <doctest.h>

#include <cmath>
#include <cstring>

#include "extragrad/kernels.hpp"
#include "extragrad/solvers.hpp"
#include "test_helpers.hpp"

using namespace extragrad;
using testing::to_eigen;

namespace {

VIProblem affine_problem(Matrix a, Vector c, ProxFunction g = {}) {
  return VIProblem(FiniteSumOperator({{std::move(a), std::move(c)}}), std::move(g));
}

VIProblem zero_problem(std::size_t d, std::size_t n) {
  return VIProblem(FiniteSumOperator(std::vector<AffineComponent>(n, {Matrix(d, d), Vector(d, 0.0)})),
                   ProxFunction::zero());
}

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("solvers") {
  TEST_CASE("method names round-trip") {
    for (Method m : {Method::SegSame, Method::SegIndependent, Method::Sgda, Method::MomentumEg, Method::KStepEg,
                     Method::Implicit})
      CHECK(parse_method(method_name(m)) == m);
    CHECK_FALSE(parse_method("adam"));
  }

  TEST_CASE("config validation names the field") {
    MethodConfig c;
    c.eta1 = 0.0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("eta1"), std::invalid_argument);
    c.eta1 = 0.1;
    c.beta2 = 1.0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("beta2"), std::invalid_argument);
  }

  TEST_CASE("a zero operator is a fixed point for every method") {
    const VIProblem p = zero_problem(3, 2);
    const Vector x{1, -2, 0.5};
    Rng rng(1);
    const auto s = seg_same_step(p, x, 0.3, 0.4, rng);
    CHECK(s.y == x);
    CHECK(s.x_next == x);
    const auto i = seg_independent_step(p, x, 0.3, 0.4, rng);
    CHECK(i.y == x);
    CHECK(i.x_next == x);
    CHECK(sgda_step(p, x, 0.3, rng) == x);
    const auto k = kstep_eg_step(p, x, 0.3, 4, rng);
    CHECK(k.y_k == x);
    CHECK(implicit_step(p, x, 0.7) == x);
  }

  TEST_CASE("deterministic bilinear step equals the explicit block update matrix") {
    Rng rng(2);
    for (std::size_t m : {1, 2, 5}) {
      const Matrix b = gaussian_matrix(m, m, rng);
      const VIProblem p = saddle_to_vi(BilinearSaddle(b, Vector(m, 0.0), Vector(m, 0.0)));
      const double eta1 = 0.3, eta2 = 0.2;
      const Eigen::MatrixXd be = to_eigen(b);
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
      Eigen::MatrixXd u(2 * m, 2 * m);
      u << id - eta1 * eta2 * be * be.transpose(), -eta2 * be, eta2 * be.transpose(),
          id - eta1 * eta2 * be.transpose() * be;
      const Vector z = gaussian_vector(2 * m, rng);
      const Eigen::VectorXd ref = u * to_eigen(z);
      const Vector got = seg_same_step(p, z, eta1, eta2, rng).x_next;
      for (std::size_t i = 0; i < 2 * m; ++i) CHECK(std::abs(got[i] - ref(static_cast<Eigen::Index>(i))) <= 1e-12);
    }
    // Skew (x, y) -> (y, -x) from z = (1, 0) with eta = 0.5.
    const VIProblem rot = saddle_to_vi(BilinearSaddle(Matrix::identity(1), Vector{0}, Vector{0}));
    const Vector next = seg_same_step(rot, Vector{1, 0}, 0.5, 0.5, rng).x_next;
    CHECK(next[0] == doctest::Approx(0.75));
    CHECK(next[1] == doctest::Approx(0.5));
  }

  TEST_CASE("scalar strongly monotone recursion") {
    const VIProblem p = affine_problem(Matrix::identity(2), Vector{0, 0});
    Rng rng(3);
    const Vector x{3, 4};
    const Vector next = seg_same_step(p, x, 0.4, 0.4, rng).x_next;
    CHECK(norm(next) == doctest::Approx(0.76 * 5.0).epsilon(1e-14));
    const Vector g = sgda_step(p, x, 0.5, rng);
    CHECK(g == Vector{1.5, 2.0});
  }

  TEST_CASE("gradient descent ascent expands a rotation") {
    const VIProblem rot = saddle_to_vi(BilinearSaddle(Matrix::identity(1), Vector{0}, Vector{0}));
    Rng rng(4);
    for (double eta : {0.01, 0.3, 2.0}) {
      const Vector z{0.6, -1.1};
      const Vector next = sgda_step(rot, z, eta, rng);
      CHECK(sq_norm(next) == doctest::Approx((1 + eta * eta) * sq_norm(z)).epsilon(1e-14));
    }
  }

  TEST_CASE("sample and evaluation accounting") {
    Rng gen(5);
    FiniteSumBilinearOptions o;
    o.dim = 3;
    o.components = 4;
    const VIProblem p = finite_sum_bilinear(o, gen);
    const Vector x = gaussian_vector(6, gen);
    Rng rng(6);
    EvalCounters c;
    seg_same_step(p, x, 0.1, 0.1, rng, &c);
    CHECK(c.samples == 1);
    CHECK(c.evaluations == 2);
    c = {};
    seg_independent_step(p, x, 0.1, 0.1, rng, &c);
    CHECK(c.samples == 2);
    CHECK(c.evaluations == 2);
    c = {};
    sgda_step(p, x, 0.1, rng, &c);
    CHECK(c.samples == 1);
    CHECK(c.evaluations == 1);
    for (std::size_t k : {1, 3, 5}) {
      c = {};
      kstep_eg_step(p, x, 0.1, k, rng, &c);
      CHECK(c.samples == 1);
      CHECK(c.evaluations == k + 1);
    }
  }

  TEST_CASE("the same sample serves both evaluations") {
    Rng gen(7);
    FiniteSumBilinearOptions o;
    o.dim = 2;
    o.components = 5;
    const VIProblem p = finite_sum_bilinear(o, gen);
    const Vector x = gaussian_vector(4, gen);
    for (int t = 0; t < 20; ++t) {
      Rng a(100 + t);
      const SegStepResult r = seg_same_step(p, x, 0.2, 0.3, a);
      const AffineComponent& f = p.op().component(r.sample);
      Vector fx(4), fy(4);
      f.evaluate(x, fx);
      Vector y = x;
      kernels::axpy(-0.2, fx, y);
      f.evaluate(y, fy);
      Vector next = x;
      kernels::axpy(-0.3, fy, next);
      CHECK(same_bits(r.y, y));
      CHECK(same_bits(r.x_next, next));
    }
  }

  TEST_CASE("reduction identities are bitwise") {
    Rng gen(8);
    FiniteSumBilinearOptions o;
    o.dim = 3;
    o.components = 4;
    const VIProblem p = finite_sum_bilinear(o, gen);
    const Vector x0 = gaussian_vector(6, gen);
    MethodConfig eg;
    eg.eta1 = 0.2;
    eg.eta2 = 0.15;
    eg.iterations = 200;
    eg.seed = 9;
    MethodConfig mom = eg;
    mom.method = Method::MomentumEg;
    const RunRecord a = run(p, eg, x0), b = run(p, mom, x0);
    CHECK(same_bits(a.final_iterate, b.final_iterate));

    MethodConfig k1 = eg;
    k1.method = Method::KStepEg;
    k1.k = 1;
    k1.eta2 = k1.eta1;
    MethodConfig same = eg;
    same.eta2 = same.eta1;
    CHECK(same_bits(run(p, same, x0).final_iterate, run(p, k1, x0).final_iterate));

    // n = 1: the independent second draw consumes no entropy.
    const VIProblem single = affine_problem(p.op().component(0).a, p.op().component(0).c);
    MethodConfig ind = same;
    ind.method = Method::SegIndependent;
    CHECK(same_bits(run(single, same, x0).final_iterate, run(single, ind, x0).final_iterate));
  }

  TEST_CASE("momentum step equals the 4x4 block on a scalar bilinear problem") {
    const double sigma = 1.0, eta = 0.4, b1 = 0.0, b2 = -0.3;
    const VIProblem p = saddle_to_vi(BilinearSaddle(Matrix{{sigma}}, Vector{0}, Vector{0}));
    // Derived from y = x - eta1 F(x) + beta1 (x - x_prev), x+ = x - eta2 F(y) + beta2 (x - x_prev)
    // with F(x, y) = (sigma y, -sigma x).
    const double d = 1 + b2 - eta * eta * sigma * sigma;
    Eigen::Matrix4d t;
    t << d, -eta * (1 + b1) * sigma, -b2, eta * b1 * sigma, eta * (1 + b1) * sigma, d, -eta * b1 * sigma, -b2, 1, 0,
        0, 0, 0, 1, 0, 0;
    Rng rng(10);
    for (double beta1 : {0.0, 0.25, -0.4}) {
      Eigen::Matrix4d tb = t;
      tb(0, 1) = -eta * (1 + beta1) * sigma;
      tb(1, 0) = eta * (1 + beta1) * sigma;
      tb(0, 3) = eta * beta1 * sigma;
      tb(1, 2) = -eta * beta1 * sigma;
      const Vector x{0.7, -0.2}, xp{0.1, 0.5};
      Eigen::Vector4d s(x[0], x[1], xp[0], xp[1]);
      const Eigen::Vector4d ref = tb * s;
      const auto r = momentum_eg_step(p, x, xp, eta, eta, beta1, b2, rng);
      CHECK(std::abs(r.x_next[0] - ref(0)) <= 1e-12);
      CHECK(std::abs(r.x_next[1] - ref(1)) <= 1e-12);
    }
    // x_prev = x switches momentum off.
    const Vector x{0.3, 0.9};
    Rng r1(11), r2(11);
    const auto m = momentum_eg_step(p, x, x, 0.3, 0.2, 0.4, -0.3, r1);
    const auto s = seg_same_step(p, x, 0.3, 0.2, r2);
    CHECK(same_bits(m.x_next, s.x_next));
    CHECK_THROWS_AS(momentum_eg_step(affine_problem(Matrix::identity(1), Vector{0}, ProxFunction::l1(1.0)), Vector{1},
                                     Vector{1}, 0.1, 0.1, 0.0, 0.0, r1),
                    std::invalid_argument);
  }

  TEST_CASE("implicit step solves the fixed-point equation") {
    const VIProblem id = affine_problem(Matrix::identity(2), Vector{0, 0});
    const Vector w = implicit_step(id, Vector{2, -4}, 1.0);
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == doctest::Approx(-2.0));

    Rng rng(12);
    const std::vector<ProxFunction> gs{ProxFunction::zero(), ProxFunction::squared_l2(0.8, Vector{0.5, 0, -0.5, 1}),
                                       ProxFunction::l1(0.3), ProxFunction::ball(0.7)};
    for (const ProxFunction& g : gs) {
      CAPTURE(g.kind());
      for (int trial = 0; trial < 10; ++trial) {
        const FiniteSumOperator op = random_monotone_affine({4, 1, 1.0, 1.0}, rng);
        const VIProblem p(op, g);
        const double eta = 0.5 / op.lipschitz();
        const Vector x = gaussian_vector(4, rng);
        const Vector wi = implicit_step(p, x, eta);
        Vector fw = op.evaluate_full(wi);
        Vector v = x;
        kernels::axpy(-eta, fw, v);
        CHECK(sq_distance(wi, g.prox(eta, v)) <= 1e-20);
      }
    }
  }

  TEST_CASE("extrapolation approaches the implicit update geometrically") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
      const FiniteSumOperator op = random_monotone_affine({5, 1, 1.0, 1.0}, rng);
      const VIProblem p(op, ProxFunction::zero());
      const double l = op.lipschitz(), eta = 0.7 / l;
      const Vector x = gaussian_vector(5, rng);
      // w solves (I + eta A) w = x - eta c.
      const Eigen::MatrixXd a = to_eigen(op.component(0).a);
      const Eigen::VectorXd rhs = to_eigen(x) - eta * to_eigen(op.component(0).c);
      const Vector w = testing::from_eigen((Eigen::MatrixXd::Identity(5, 5) + eta * a).fullPivLu().solve(rhs));
      Rng s(1);
      const Vector y6 = kstep_eg_step(p, x, eta, 6, s).y_k;
      CHECK(std::sqrt(sq_distance(y6, w)) <= std::pow(eta * l, 6) * std::sqrt(sq_distance(w, x)) + 1e-10);
    }
  }

  TEST_CASE("run records, averages and flags divergence") {
    Rng gen(14);
    const Matrix b = gaussian_matrix(4, 4, gen);
    const BilinearSaddle saddle(b, Vector(4, 0.0), Vector(4, 0.0));
    const VIProblem p = saddle_to_vi(saddle);
    const Vector x0 = gaussian_vector(8, gen);

    MethodConfig c;
    c.iterations = 0;
    const RunRecord empty = run(p, c, x0);
    CHECK(empty.metrics.size() == 1);
    CHECK(empty.iterations_completed == 0);
    CHECK(empty.metrics[0].dist_sq == doctest::Approx(sq_norm(x0)));

    c.iterations = 50;
    c.averaging = true;
    c.eta1 = c.eta2 = 0.1;
    Vector ysum(8, 0.0);
    std::size_t seen = 0;
    RunHooks hooks;
    hooks.on_iteration = [&](const IterState& st) {
      seen = st.t;
      CHECK(st.x_hat_sum.size() == 8);
    };
    const RunRecord r = run(p, c, x0, hooks);
    CHECK(seen == 50);
    CHECK(r.metrics.size() == 51);
    CHECK(r.ergodic_average.size() == 8);
    // Recompute the average of the y^t by replaying the deterministic steps.
    Vector x = x0;
    Rng rng(c.seed);
    for (int t = 0; t < 50; ++t) {
      const auto s = seg_same_step(p, x, 0.1, 0.1, rng);
      kernels::axpy(1.0, s.y, ysum);
      x = s.x_next;
    }
    for (std::size_t i = 0; i < 8; ++i) CHECK(r.ergodic_average[i] == doctest::Approx(ysum[i] / 50.0).epsilon(1e-12));

    MethodConfig g;
    g.method = Method::Sgda;
    g.eta1 = 3.0;
    g.iterations = 100000;
    const RunRecord d = run(p, g, x0);
    CHECK(d.diverged);
    REQUIRE(d.diverged_at);
    CHECK(d.iterations_completed == *d.diverged_at);
    CHECK(d.metrics.size() == d.iterations_completed + 1);

    const RunRecord r2 = run(p, c, x0, hooks);
    REQUIRE(r2.metrics.size() == r.metrics.size());
    for (std::size_t i = 0; i < r.metrics.size(); ++i) CHECK(r2.metrics[i].dist_sq == r.metrics[i].dist_sq);
  }

  TEST_CASE("preset-1 run contracts no slower than the exact factor") {
    Rng gen(15);
    const Matrix b = gaussian_matrix(20, 20, gen);
    const BilinearSaddle saddle(b, Vector(20, 0.0), Vector(20, 0.0));
    const double smax = saddle.sigma_max(), smin = saddle.sigma_min();
    MethodConfig c;
    c.eta1 = c.eta2 = 1.0 / (std::sqrt(2.0) * smax);
    c.iterations = 2000;
    const RunRecord r = run(saddle, c, gaussian_vector(40, gen));
    Vector dist;
    for (const MetricPoint& m : r.metrics) dist.push_back(m.dist_sq);
    // Exact factor by a dense sweep of the per-singular-value multiplier.
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(to_eigen(b)).singularValues();
    double factor = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      const double s = sv(i);
      factor = std::max(factor, std::pow(1 - c.eta1 * c.eta2 * s * s, 2) + c.eta2 * c.eta2 * s * s);
    }
    CHECK(smin > 0.0);
    CHECK(fit_per_step_factor(dist) <= factor + 1e-3);
  }

  TEST_CASE("rate fit recovers a geometric series") {
    Vector s(400);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = 3.0 * std::pow(0.9, static_cast<double>(i));
    CHECK(fit_per_step_factor(s) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(std::isnan(fit_per_step_factor(Vector{1.0})));
  }

  TEST_CASE("nonconvex extragradient on quadratics and double wells") {
    Rng gen(16);
    auto q = random_quadratic(4, 3, 0.5, 1.0, 0.0, gen);
    const double l = q->smoothness(), eta = 1.0 / (4.0 * l);
    Vector x0 = gaussian_vector(4, gen);
    const double f0 = q->value(x0) - q->infimum();
    Rng rng(17);
    const NonconvexRun r = nonconvex_eg_run(*q, x0, eta, 500, rng);
    REQUIRE(r.grad_sq.size() == 500);
    double running_min = r.grad_sq[0];
    for (std::size_t t = 1; t <= 500; ++t) {
      running_min = std::min(running_min, r.grad_sq[t - 1]);
      CHECK(running_min <= 5.0 * f0 / (eta * static_cast<double>(t)) + 1e-12);
    }
    CHECK(r.grad_sq.back() < 1e-6 * r.grad_sq.front());

    Rng rng2(18);
    const NonconvexRun at_min = nonconvex_eg_run(*q, q->minimizer(), eta, 100, rng2);
    CHECK(at_min.min_grad_sq <= 1e-24);
    for (double g : at_min.grad_sq) CHECK(g <= 1e-24);

    const NoisyQuartic quartic(5, 0.5, 1.5);
    const double lq = quartic.smoothness(), etaq = 1.0 / (4.0 * lq);
    const Vector xq(5, 1.3);
    const std::size_t t_max = 1000;
    double mean_min = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
      Rng rq(200 + seed);
      const NonconvexRun rr = nonconvex_eg_run(quartic, xq, etaq, t_max, rq);
      CHECK_FALSE(rr.left_smooth_region);
      mean_min += rr.min_grad_sq / 20.0;
    }
    const double bound = 5.0 * quartic.value(xq) / (etaq * static_cast<double>(t_max)) +
                         11.0 * etaq * lq * quartic.gradient_noise();
    CHECK(mean_min <= bound);
  }
}
