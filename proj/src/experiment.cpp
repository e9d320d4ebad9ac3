#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "extragrad/experiment.hpp"
#include "extragrad/parallel.hpp"
#include "extragrad/verify.hpp"

namespace extragrad {

using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

VIProblem inline_bilinear(const std::vector<BilinearComponentSpec>& specs) {
  const std::size_t m = specs.front().b_matrix.rows();
  std::vector<AffineComponent> comps;
  Matrix b_mean(m, m);
  Vector a_mean(m, 0.0), b_vec_mean(m, 0.0);
  const double inv_n = 1.0 / static_cast<double>(specs.size());
  for (const BilinearComponentSpec& s : specs) {
    Vector c(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
      c[i] = s.a[i];
      c[m + i] = -s.b[i];
      a_mean[i] += inv_n * s.a[i];
      b_vec_mean[i] += inv_n * s.b[i];
    }
    b_mean = b_mean + inv_n * s.b_matrix;
    comps.push_back({bilinear_joint_matrix(s.b_matrix), std::move(c)});
  }
  const BilinearSaddle mean(b_mean, a_mean, b_vec_mean);
  return VIProblem(FiniteSumOperator(std::move(comps)), ProxFunction::zero(), mean.joint_solution());
}

VIProblem inline_monotone(const InlineMonotone& s) {
  FiniteSumOperator op(s.components);
  // F(x) + mu x = 0 at the solution of the regularized VI.
  Matrix lhs = op.mean_matrix();
  for (std::size_t i = 0; i < lhs.rows(); ++i) lhs(i, i) += s.mu;
  const Vector sol = lu_solve(lhs, scaled(-1.0, op.mean_offset()));
  return VIProblem(std::move(op), ProxFunction::squared_l2(s.mu), sol);
}

std::string entry_name(const std::string& label, std::uint64_t seed, const std::string& ext) {
  return fmt::format("{}_seed{}.{}", label, seed, ext);
}

ManifestEntry write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content,
                         const MethodConfig& cfg, const std::string& format) {
  std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", (dir / name).string()));
  out << content;
  out.close();
  if (!out) throw std::runtime_error(fmt::format("write failed for '{}'", (dir / name).string()));
  return {name, cfg.display_name(), method_name(cfg.method), cfg.seed, format, content.size(), fnv1a64_hex(content)};
}

double last_finite(const RunRecord& r, double MetricPoint::*field) {
  for (auto it = r.metrics.rbegin(); it != r.metrics.rend(); ++it)
    if (std::isfinite((*it).*field)) return (*it).*field;
  return kNaN;
}

}  // namespace

Instance build_instance(const ProblemConfig& p) {
  Instance inst;
  inst.kind = p.kind;
  std::optional<Vector> reference;
  try {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, BilinearGenerator>) {
            Rng rng(s.seed);
            FiniteSumBilinearOptions o{s.dim, s.components, s.noise_at_optimum, s.planted_solution,
                                       s.linear_term_scale};
            inst.vi.emplace(finite_sum_bilinear(o, rng));
          } else if constexpr (std::is_same_v<T, std::vector<BilinearComponentSpec>>) {
            inst.vi.emplace(inline_bilinear(s));
          } else if constexpr (std::is_same_v<T, MonotoneGenerator>) {
            Rng rng(s.seed);
            StronglyMonotoneOptions o;
            o.op = {s.dim, s.components, s.symmetric_weight, s.skew_weight};
            o.mu = s.mu;
            o.noise_scale = s.noise_scale;
            inst.vi.emplace(strongly_monotone_vi(o, rng));
          } else if constexpr (std::is_same_v<T, InlineMonotone>) {
            inst.vi.emplace(inline_monotone(s));
          } else if constexpr (std::is_same_v<T, QuadraticGenerator>) {
            Rng rng(s.seed);
            auto q = random_quadratic(s.dim, s.components, s.eig_lo, s.eig_hi, s.shift_scale, rng);
            reference = q->minimizer();
            inst.objective = std::move(q);
          } else {
            inst.objective = std::make_shared<NoisyQuartic>(s.dim, s.noise_std, s.region);
          }
        },
        p.source);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("problem", fmt::format("cannot build the instance: {}", e.what()));
  }

  std::size_t d = 0;
  if (inst.vi) {
    d = inst.vi->dimension();
    inst.lipschitz = inst.vi->op().lipschitz();
    if (inst.vi->solution()) reference = *inst.vi->solution();
  } else {
    d = inst.objective->dimension();
    inst.lipschitz = inst.objective->smoothness();
  }
  if (!p.initial_point.values.empty()) {
    if (p.initial_point.values.size() != d)
      throw ConfigError("problem.initial_point.values", fmt::format("must have {} entries", d));
    inst.x0 = p.initial_point.values;
  } else {
    Rng rng(p.initial_point.seed);
    inst.x0 = gaussian_vector(d, rng, p.initial_point.scale);
    if (reference) inst.x0 = add(inst.x0, *reference);
  }

  json desc;
  desc["kind"] = problem_kind_name(p.kind);
  desc["dimension"] = d;
  desc["lipschitz"] = inst.lipschitz;
  if (inst.vi) {
    desc["components"] = inst.vi->op().size();
    desc["regularizer"] = inst.vi->regularizer().kind();
    desc["noise_at_solution"] = inst.vi->solution() ? json(inst.vi->noise_at_solution()) : json(nullptr);
  } else {
    desc["objective"] = inst.objective->description();
    desc["gradient_noise"] = inst.objective->gradient_noise();
  }
  inst.description_json = desc.dump();
  return inst;
}

MethodConfig resolve_method(const MethodSpec& m, const Instance& inst, std::uint64_t seed) {
  MethodConfig cfg = m.config;
  cfg.seed = seed;
  if (m.eta_times_l) {
    if (!(inst.lipschitz > 0.0)) throw ConfigError("eta_times_L", "the instance has L = 0");
    cfg.eta1 = cfg.eta2 = *m.eta_times_l / inst.lipschitz;
  }
  return cfg;
}

RunRecord run_method(const Instance& inst, const MethodConfig& cfg, const GapOutput& gap) {
  if (inst.vi) {
    RunHooks hooks;
    if (gap.stride > 0) {
      const VIProblem& p = *inst.vi;
      Ball ball{p.solution() ? *p.solution() : inst.x0, gap.radius};
      hooks.gap = [&p, ball](std::span<const double> x) { return restricted_gap(p, x, ball).gap; };
      hooks.gap_stride = gap.stride;
    }
    return run(*inst.vi, cfg, inst.x0, hooks);
  }
  Rng rng(cfg.seed);
  NonconvexRun r = nonconvex_eg_run(*inst.objective, inst.x0, cfg.eta1, cfg.iterations, rng);
  r.record.config = cfg;
  return std::move(r.record);
}

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& c,
                    const std::vector<ManifestEntry>& entries, std::string_view command) {
  std::vector<ManifestEntry> sorted = entries;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  json files = json::array();
  for (const ManifestEntry& e : sorted)
    files.push_back({{"path", e.path},
                     {"label", e.label},
                     {"method", e.method},
                     {"seed", e.seed},
                     {"format", e.format},
                     {"bytes", e.bytes},
                     {"fnv1a64", e.fnv1a64}});
  json j;
  j["command"] = command;
  j["config"] = json::parse(serialize_config(c));
  j["files"] = files;
  std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", (dir / "manifest.json").string()));
  out << j.dump(2) << '\n';
}

std::vector<ManifestEntry> run_experiment(const ExperimentConfig& c, const std::filesystem::path& dir,
                                          std::size_t threads, const std::vector<std::string>& formats) {
  validate_config(c);
  const std::vector<std::string>& fmts = formats.empty() ? c.output.formats : formats;
  for (const std::string& f : fmts)
    if (f != "csv" && f != "jsonl") throw ConfigError("format", fmt::format("expected csv or jsonl, got '{}'", f));
  const Instance inst = build_instance(c.problem);
  const std::vector<std::uint64_t> seeds = c.seeds.values();
  std::filesystem::create_directories(dir);

  const std::size_t jobs = c.methods.size() * seeds.size();
  std::vector<MethodConfig> configs;
  configs.reserve(jobs);
  for (const MethodSpec& m : c.methods)
    for (std::uint64_t s : seeds) configs.push_back(resolve_method(m, inst, s));
  const bool gap = c.output.gap.stride > 0;

  std::vector<std::vector<ManifestEntry>> slots(jobs);
  parallel_for(jobs, resolve_threads(threads), [&](std::size_t i) {
    const MethodConfig& cfg = configs[i];
    const RunRecord rec = run_method(inst, cfg, c.output.gap);
    const auto rows = checkpoint_iterations(rec.iterations_completed, c.output.checkpoint_stride);
    for (const std::string& f : fmts) {
      std::ostringstream ss;
      if (f == "csv")
        write_csv(ss, rec, rows, gap);
      else
        write_jsonl(ss, rec, rows, gap, inst.description_json);
      slots[i].push_back(write_file(dir, entry_name(cfg.display_name(), cfg.seed, f), ss.str(), cfg, f));
    }
  });
  std::vector<ManifestEntry> entries;
  for (auto& s : slots) entries.insert(entries.end(), s.begin(), s.end());
  write_manifest(dir, c, entries, "run");
  return entries;
}

std::vector<ManifestEntry> run_sweep(const ExperimentConfig& c, const SweepSpec& s, const std::filesystem::path& dir,
                                     std::size_t threads) {
  validate_config(c);
  static const std::vector<std::string> kParams{"eta", "eta1", "eta2", "eta_times_L", "beta1", "beta2"};
  if (std::find(kParams.begin(), kParams.end(), s.parameter) == kParams.end())
    throw ConfigError("param", "expected eta, eta1, eta2, eta_times_L, beta1 or beta2");
  if (s.values.empty()) throw ConfigError("values", "at least one value is required");
  const Instance inst = build_instance(c.problem);
  const std::vector<std::uint64_t> seeds = c.seeds.values();

  struct Job {
    MethodConfig cfg;
    double value;
  };
  std::vector<Job> jobs;
  for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
    for (double v : s.values) {
      for (std::uint64_t seed : seeds) {
        MethodConfig cfg = resolve_method(c.methods[mi], inst, seed);
        if (s.parameter == "eta") {
          cfg.eta1 = cfg.eta2 = v;
        } else if (s.parameter == "eta1") {
          cfg.eta1 = v;
        } else if (s.parameter == "eta2") {
          cfg.eta2 = v;
        } else if (s.parameter == "eta_times_L") {
          cfg.eta1 = cfg.eta2 = v / inst.lipschitz;
        } else if (s.parameter == "beta1") {
          cfg.beta1 = v;
        } else {
          cfg.beta2 = v;
        }
        try {
          cfg.validate();
        } catch (const std::invalid_argument& e) {
          throw ConfigError("values", fmt::format("{} = {} is invalid: {}", s.parameter, format_double(v), e.what()));
        }
        if ((cfg.beta1 != 0.0 || cfg.beta2 != 0.0) && cfg.method != Method::MomentumEg)
          throw ConfigError("param", fmt::format("{} applies to momentum_eg only", s.parameter));
        jobs.push_back({cfg, v});
      }
    }
  }

  std::vector<std::string> rows(jobs.size());
  parallel_for(jobs.size(), resolve_threads(threads), [&](std::size_t i) {
    const Job& j = jobs[i];
    const RunRecord rec = run_method(inst, j.cfg, GapOutput{});
    Vector dist;
    dist.reserve(rec.metrics.size());
    for (const MetricPoint& m : rec.metrics) dist.push_back(m.dist_sq);
    const double rate = rec.diverged ? kNaN : fit_per_step_factor(dist);
    rows[i] = fmt::format("{},{},{},{},{},{},{},{},{},{}\n", j.cfg.display_name(), method_name(j.cfg.method),
                          s.parameter, format_double(j.value), j.cfg.seed, rec.iterations_completed,
                          rec.diverged ? 1 : 0, format_double(last_finite(rec, &MetricPoint::dist_sq)),
                          format_double(last_finite(rec, &MetricPoint::op_norm)), format_double(rate));
  });
  std::string content =
      "label,method,parameter,value,seed,iterations_completed,diverged,final_dist_sq,final_op_norm,dist_sq_rate\n";
  for (const std::string& r : rows) content += r;

  std::filesystem::create_directories(dir);
  MethodConfig summary_cfg;
  summary_cfg.label = "sweep";
  ManifestEntry e = write_file(dir, "sweep.csv", content, summary_cfg, "csv");
  e.method = "";
  e.seed = 0;
  std::vector<ManifestEntry> entries{e};
  write_manifest(dir, c, entries, "sweep");
  return entries;
}

}  // namespace extragrad
