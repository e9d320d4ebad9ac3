// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "extragrad/experiment.hpp"
#include "extragrad/spectral.hpp"
#include "extragrad/verify.hpp"
#include "test_helpers.hpp"

using namespace extragrad;
using testing::to_eigen;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

void fold(Outcome& o, const TheoremCheckReport& r) {
  o.ok = o.ok && r.passed;
  o.detail += fmt::format("{}: {} ({} checked, {} violations, worst slack {:.3e}); ", r.id, r.passed ? "pass" : "fail",
                          r.checked, r.violations, r.worst_slack);
}

// Criterion 1: k-step extragradient against w from an Eigen LU solve.
Outcome criterion1() {
  Outcome o;
  fold(o, check_theorem1());
  Rng rng(101);
  std::size_t checked = 0, violations = 0;
  for (std::size_t inst = 0; inst < 100; ++inst) {
    MonotoneAffineOptions mo;
    mo.dim = 8;
    const FiniteSumOperator op = random_monotone_affine(mo, rng);
    const VIProblem p(op, ProxFunction::zero());
    const Eigen::MatrixXd a = to_eigen(op.component(0).a);
    const Eigen::VectorXd c = to_eigen(op.component(0).c);
    const double l = testing::operator_norm(a);
    for (double eta_l : {0.1, 0.5, 0.9}) {
      const double eta = eta_l / l;
      const Vector x = gaussian_vector(8, rng);
      const Eigen::VectorXd xe = to_eigen(x);
      const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(8, 8) + eta * a;
      const Eigen::VectorXd w = lhs.partialPivLu().solve(xe - eta * c);
      for (std::size_t k = 1; k <= 5; ++k) {
        Rng step_rng(k);
        const KStepResult r = kstep_eg_step(p, x, eta, k, step_rng);
        ++checked;
        if (!((w - to_eigen(r.y_k)).norm() <= std::pow(eta_l, static_cast<double>(k)) * (w - xe).norm() + 1e-10))
          ++violations;
      }
    }
  }
  o.ok = o.ok && violations == 0;
  o.detail += fmt::format("Eigen oracle: {} checked, {} violations", checked, violations);
  return o;
}

// Criterion 2: exact bilinear rate, matrix oracle and the 0.75 case.
Outcome criterion2() {
  Outcome o;
  fold(o, check_theorem4());
  Rng rng(102);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t m = 1 + rng.uniform_index(20);
    const Matrix b = gaussian_matrix(m, m, rng);
    const int preset = 1 + (i % 2);
    const Stepsizes s = corollary_stepsizes(b, preset);
    const double f = eg_contraction_factor(b, s.eta1, s.eta2).per_step_sq_factor;
    const Eigen::MatrixXd be = to_eigen(b);
    const Eigen::Index n = be.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd u(2 * n, 2 * n);
    u << id - s.eta1 * s.eta2 * be * be.transpose(), -s.eta2 * be, s.eta2 * be.transpose(),
        id - s.eta1 * s.eta2 * be.transpose() * be;
    const double ref = std::pow(testing::operator_norm(u), 2);
    worst = std::max(worst, std::abs(f - ref) / std::max(1.0, ref));
  }
  const bool matrix_ok = worst <= 1e-9;
  o.ok = o.ok && matrix_ok;
  o.detail += fmt::format("matrix oracle worst relative error {:.2e}; ", worst);

  const double eta = 1 / std::sqrt(2.0);
  const BilinearSaddle planted(Matrix{{1.0}}, Vector{0.0}, Vector{0.0});
  MethodConfig cfg;
  cfg.method = Method::SegSame;
  cfg.eta1 = cfg.eta2 = eta;
  cfg.iterations = 200;
  const RunRecord rec = run(planted, cfg, Vector{1.0, 1.0});
  Vector dist;
  for (const MetricPoint& m : rec.metrics) dist.push_back(m.dist_sq);
  const double fit = fit_per_step_factor(dist);
  const double exact = eg_contraction_factor(1.0, 1.0, eta, eta).per_step_sq_factor;
  const bool planted_ok = std::abs(fit - 0.75) <= 1e-6 && std::abs(exact - 0.75) <= 1e-6;
  o.ok = o.ok && planted_ok;
  o.detail += fmt::format("planted case fit {:.9f}, exact {:.9f}", fit, exact);
  return o;
}

// Criterion 5: momentum runs plus an Eigen eigenvalue oracle and heatmap checks.
Outcome criterion5() {
  Outcome o;
  fold(o, check_momentum());
  Rng rng(105);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double s = rng.uniform(0.05, 1.0), b1 = rng.uniform(-0.5, 0.5), b2 = rng.uniform(-0.5, 0.5);
    const MomentumBlock blk = momentum_block(s, 1.0, 1.0, b1, b2);
    const double ref = Eigen::EigenSolver<Eigen::MatrixXd>(to_eigen(blk.matrix)).eigenvalues().cwiseAbs().maxCoeff();
    worst = std::max(worst, std::abs(momentum_spectral_radius(blk) - ref));
  }
  o.ok = o.ok && worst <= 1e-10;
  o.detail += fmt::format("block radius vs Eigen worst {:.2e}; ", worst);

  const Heatmap base = heatmap_grid(HeatmapSpec::defaults(HeatmapMode::Beta1VsEtaSigma), 0);
  bool unit = true;
  for (std::size_t r = 0; r < base.y_values.size(); ++r) unit = unit && base.ratio(r, 0) == 1.0;
  o.ok = o.ok && unit && base.x_values.front() == 0.0;

  HeatmapSpec valley{HeatmapMode::Beta2VsEtaSigma, {-0.99, 0.99, 199}, {0.3, 0.7, 41}, 0.01};
  const Heatmap h = heatmap_grid(valley, 0);
  double worst_offset = 0.0;
  for (std::size_t r = 0; r < h.y_values.size(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < h.x_values.size(); ++c)
      if (h.ratio(r, c) < h.ratio(r, best)) best = c;
    worst_offset = std::max(worst_offset, std::abs(h.x_values[best] + 0.3));
  }
  o.ok = o.ok && worst_offset <= 0.1 + 1e-12;
  o.detail += fmt::format("ratio at beta = 0 exactly 1: {}; valley offset from -0.3 at most {:.3f}", unit ? "yes" : "no",
                          worst_offset);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Criterion 9: repeated runs of the same config give byte-identical CSVs.
Outcome criterion9() {
  Outcome o;
  const ExperimentConfig c = load_config(fs::path(EXTRAGRAD_SOURCE_DIR) / "configs" / "fig1.json");
  const fs::path root = fs::temp_directory_path() / "extragrad_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::vector<ManifestEntry>> runs;
  for (std::size_t threads : {1, 1, 4}) runs.push_back(run_experiment(c, root / std::to_string(runs.size()), threads, {"csv"}));
  std::size_t compared = 0, differing = 0;
  for (const ManifestEntry& e : runs[0]) {
    const std::string first = slurp(root / "0" / e.path);
    for (std::size_t i = 1; i < runs.size(); ++i) {
      ++compared;
      if (slurp(root / std::to_string(i) / e.path) != first) ++differing;
    }
  }
  fs::remove_all(root);
  o.ok = compared > 0 && differing == 0;
  o.detail = fmt::format("{} CSV files compared across 3 runs (1, 1 and 4 threads), {} differ", compared, differing);
  return o;
}

Outcome from_suites(std::initializer_list<std::function<TheoremCheckReport()>> checks) {
  Outcome o;
  for (const auto& f : checks) fold(o, f());
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double limit_seconds;
    std::function<Outcome()> body;
  };
  const std::vector<Criterion> criteria{
      {1, "implicit-update approximation", 5, criterion1},
      {2, "bilinear contraction exactness", 30, criterion2},
      {3, "strongly monotone envelope", 60, [] { return from_suites({[] { return check_theorem2(); }}); }},
      {4, "finite-sum bilinear divergence contrast", 30, [] { return from_suites({[] { return check_fig1(); }}); }},
      {5, "momentum spectral agreement", 60, criterion5},
      {6, "nonconvex gradient bound", 60, [] { return from_suites({[] { return check_theorem5(); }}); }},
      {7, "ergodic gap decay", 120, [] { return from_suites({[] { return check_theorem3(); }}); }},
      {8, "prox and operator properties", 5,
       [] { return from_suites({[] { return check_lemma1(); }, [] { return check_operator_properties(); }}); }},
      {9, "determinism", 60, criterion9},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = fmt::format("exception: {}", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.ok && in_time;
    if (!pass) ++failures;
    std::printf("%s criterion %d %s [%.2f s, limit %.0f s%s] %s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                c.limit_seconds, in_time ? "" : ", exceeded", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
