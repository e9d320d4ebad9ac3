// Command-line front end: run, spectra, heatmap, verify, sweep.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "extragrad/experiment.hpp"
#include "extragrad/parallel.hpp"
#include "extragrad/spectral.hpp"
#include "extragrad/verify.hpp"

namespace eg = extragrad;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Usage and configuration problems exit with kExitUsage.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunArgs {
  std::string config, out, seeds, format;
};

struct SpectraArgs {
  double sigma_max = 0.0, sigma_min = 0.0, eta1 = 0.0, eta2 = 0.0;
  int preset = 0;
  std::string matrix, config, out;
};

struct HeatmapArgs {
  std::string mode = "beta2_vs_etasigma", out = "heatmap";
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0, eta_sigma = 0.01;
  std::size_t x_steps = 0, y_steps = 0;
};

struct VerifyArgs {
  std::string suite = "all", out;
};

struct SweepArgs {
  std::string config, out, seeds, param, values, range;
};

eg::ExperimentConfig load(const std::string& path, const std::string& seeds) {
  eg::ExperimentConfig c = eg::load_config(path);
  if (!seeds.empty()) {
    c.seeds = eg::parse_seeds(seeds);
    eg::validate_config(c);
  }
  return c;
}

bool known_format(const std::string& f) { return f == "csv" || f == "jsonl"; }

int cmd_run(const RunArgs& a, std::size_t threads) {
  const eg::ExperimentConfig c = load(a.config, a.seeds);
  std::vector<std::string> formats;
  if (!a.format.empty()) {
    if (!known_format(a.format)) throw UsageError("--format must be csv or jsonl");
    formats.push_back(a.format);
  }
  const std::filesystem::path dir = std::filesystem::path(a.out.empty() ? c.output.directory : a.out);
  const auto entries = eg::run_experiment(c, dir, threads, formats);
  fmt::print("wrote {} files and manifest.json to {}\n", entries.size(), dir.string());
  return kExitOk;
}

eg::Matrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot read '{}'", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(fmt::format("{}: invalid JSON ({})", path, e.what()));
  }
  if (j.is_object() && j.contains("B")) j = j["B"];
  if (!j.is_array() || j.empty()) throw UsageError(fmt::format("{}: expected a nested array of rows", path));
  std::vector<double> data;
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  for (const json& row : j) {
    if (!row.is_array() || row.size() != cols || cols == 0)
      throw UsageError(fmt::format("{}: rows must be non-empty and of equal length", path));
    for (const json& v : row) {
      if (!v.is_number()) throw UsageError(fmt::format("{}: entries must be numbers", path));
      data.push_back(v.get<double>());
    }
  }
  return eg::Matrix(j.size(), cols, std::move(data));
}

// Mean B of a bilinear instance: the upper-right block of the joint mean matrix.
eg::Matrix mean_bilinear_matrix(const eg::ExperimentConfig& c) {
  if (c.problem.kind != eg::ProblemKind::Bilinear) throw UsageError("--config must describe a bilinear problem");
  const eg::Instance inst = eg::build_instance(c.problem);
  const eg::Matrix joint = inst.vi->op().mean_matrix();
  const std::size_t m = joint.rows() / 2;
  eg::Matrix b(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) b(i, j) = joint(i, m + j);
  return b;
}

int cmd_spectra(const SpectraArgs& a, bool explicit_sigmas, bool explicit_steps) {
  const int sources = static_cast<int>(explicit_sigmas) + static_cast<int>(!a.matrix.empty()) +
                      static_cast<int>(!a.config.empty());
  if (sources != 1) throw UsageError("give exactly one of --sigma-max/--sigma-min, --matrix or --config");
  if ((a.preset != 0) == explicit_steps) throw UsageError("give either --preset or --eta1/--eta2");
  if (a.preset != 0 && a.preset != 1 && a.preset != 2) throw UsageError("--preset must be 1 or 2");

  double smax = a.sigma_max, smin = a.sigma_min;
  if (!explicit_sigmas) {
    const eg::Matrix b = a.matrix.empty() ? mean_bilinear_matrix(eg::load_config(a.config)) : read_matrix(a.matrix);
    if (!b.square()) throw UsageError("B must be square");
    const eg::Vector sv = eg::singular_values(b);
    smax = sv.front();
    smin = sv.back();
  }
  if (!(smax >= smin && smin >= 0.0)) throw UsageError("need sigma_max >= sigma_min >= 0");

  eg::SpectralReport r;
  try {
    r = a.preset != 0 ? eg::corollary_report(smax, smin, a.preset) : eg::eg_contraction_factor(smax, smin, a.eta1, a.eta2);
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  json j;
  j["sigma_max"] = r.sigma_max;
  j["sigma_min"] = r.sigma_min;
  j["kappa"] = r.kappa();
  j["eta1"] = r.eta1;
  j["eta2"] = r.eta2;
  j["per_step_sq_factor"] = r.per_step_sq_factor;
  j["preset"] = r.preset;
  j["corollary_bound"] = std::isfinite(r.corollary_bound) ? json(r.corollary_bound) : json(nullptr);
  j["converges"] = r.converges;
  j["preconditions_ok"] = r.preconditions_ok;
  if (!a.out.empty()) {
    std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", a.out));
    out << j.dump(2) << '\n';
  }
  for (auto it = j.begin(); it != j.end(); ++it) fmt::print("{:<20} {}\n", it.key(), it.value().dump());
  return kExitOk;
}

std::string axis_name(eg::HeatmapMode m, bool x) {
  switch (m) {
    case eg::HeatmapMode::Beta1VsEtaSigma: return x ? "beta1" : "eta_sigma";
    case eg::HeatmapMode::Beta2VsEtaSigma: return x ? "beta2" : "eta_sigma";
    case eg::HeatmapMode::Beta1VsBeta2: return x ? "beta1" : "beta2";
  }
  return "";
}

template <class Cell>
std::string matrix_csv(const eg::Heatmap& h, Cell cell) {
  std::string s = axis_name(h.spec.mode, false) + "/" + axis_name(h.spec.mode, true);
  for (double x : h.x_values) s += "," + eg::format_double(x);
  s += '\n';
  for (std::size_t r = 0; r < h.y_values.size(); ++r) {
    s += eg::format_double(h.y_values[r]);
    for (std::size_t c = 0; c < h.x_values.size(); ++c) s += "," + cell(r, c);
    s += '\n';
  }
  return s;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  out << content;
}

int cmd_heatmap(const HeatmapArgs& a, const CLI::App& sub, std::size_t threads) {
  const auto mode = eg::parse_heatmap_mode(a.mode);
  if (!mode) throw UsageError("--mode must be beta1_vs_etasigma, beta2_vs_etasigma or beta1_vs_beta2");
  eg::HeatmapSpec spec = eg::HeatmapSpec::defaults(*mode);
  if (sub.count("--x-lo")) spec.x_axis.lo = a.x_lo;
  if (sub.count("--x-hi")) spec.x_axis.hi = a.x_hi;
  if (sub.count("--x-steps")) spec.x_axis.steps = a.x_steps;
  if (sub.count("--y-lo")) spec.y_axis.lo = a.y_lo;
  if (sub.count("--y-hi")) spec.y_axis.hi = a.y_hi;
  if (sub.count("--y-steps")) spec.y_axis.steps = a.y_steps;
  if (sub.count("--eta-sigma")) spec.fixed_eta_sigma = a.eta_sigma;
  eg::Heatmap h;
  try {
    h = eg::heatmap_grid(spec, eg::resolve_threads(threads));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::filesystem::path prefix(a.out);
  if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());
  write_text(a.out + "_ratio.csv", matrix_csv(h, [&](std::size_t r, std::size_t c) {
               return eg::format_double(h.ratio(r, c));
             }));
  write_text(a.out + "_radius.csv", matrix_csv(h, [&](std::size_t r, std::size_t c) {
               return eg::format_double(h.radius(r, c));
             }));
  write_text(a.out + "_mask.csv", matrix_csv(h, [&](std::size_t r, std::size_t c) {
               return std::string(h.diverges_at(r, c) ? "1" : "0");
             }));
  std::size_t diverging = 0;
  for (auto v : h.diverges) diverging += v;
  fmt::print("{} grid {}x{} ({} diverging cells): {}_ratio.csv, {}_radius.csv, {}_mask.csv\n",
             eg::heatmap_mode_name(*mode), h.y_values.size(), h.x_values.size(), diverging, a.out, a.out, a.out);
  return kExitOk;
}

int cmd_verify(const VerifyArgs& a, std::size_t threads) {
  if (!eg::is_suite(a.suite)) {
    std::string names;
    for (const auto& n : eg::suite_names()) names += (names.empty() ? "" : ", ") + n;
    throw UsageError(fmt::format("unknown suite '{}' (expected one of {})", a.suite, names));
  }
  const auto reports = eg::run_suite(a.suite, eg::resolve_threads(threads));
  std::string jsonl;
  bool ok = true;
  for (const auto& r : reports) {
    jsonl += r.to_json() + "\n";
    ok = ok && r.passed;
  }
  const std::string table = eg::summary_table(reports);
  if (a.out.empty()) {
    std::fwrite(jsonl.data(), 1, jsonl.size(), stdout);
    std::fwrite(table.data(), 1, table.size(), stderr);
  } else {
    write_text(a.out, jsonl);
    std::fwrite(table.data(), 1, table.size(), stdout);
  }
  return ok ? kExitOk : kExitFailure;
}

eg::Vector parse_values(const SweepArgs& a) {
  if (a.values.empty() == a.range.empty()) throw UsageError("give exactly one of --values or --range");
  eg::Vector v;
  auto number = [](const std::string& s) {
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty() || !std::isfinite(d)) throw UsageError(fmt::format("not a number: '{}'", s));
    return d;
  };
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
  };
  if (!a.values.empty()) {
    for (const std::string& p : split(a.values, ',')) v.push_back(number(p));
    return v;
  }
  const auto parts = split(a.range, ':');
  if (parts.size() != 3) throw UsageError("--range expects LO:HI:STEPS");
  const double lo = number(parts[0]), hi = number(parts[1]);
  const double steps = number(parts[2]);
  if (steps < 2 || steps != std::floor(steps)) throw UsageError("--range STEPS must be an integer >= 2");
  return eg::GridAxis{lo, hi, static_cast<std::size_t>(steps)}.values();
}

int cmd_sweep(const SweepArgs& a, std::size_t threads) {
  const eg::ExperimentConfig c = load(a.config, a.seeds);
  const eg::SweepSpec s{a.param, parse_values(a)};
  const std::filesystem::path dir = std::filesystem::path(a.out.empty() ? c.output.directory : a.out);
  eg::run_sweep(c, s, dir, threads);
  fmt::print("wrote sweep.csv and manifest.json to {}\n", dir.string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic extragradient solvers, exact bilinear rates and verification checks"};
  app.require_subcommand(1, 1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware); EXTRAGRAD_THREADS overrides")
      ->check(CLI::NonNegativeNumber);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run every method x seed of a config; writes CSV/JSONL and manifest.json");
  run->add_option("--config", run_args.config, "Experiment config (JSON)")->required();
  run->add_option("--out", run_args.out, "Output directory (default: output.directory)");
  run->add_option("--seeds", run_args.seeds, "Seeds as a list '1,2,3' or 'N:BASE'");
  run->add_option("--format", run_args.format, "Write only this format")->check(CLI::IsMember({"csv", "jsonl"}));
  run->add_option("--threads", threads, "Worker threads");

  SpectraArgs sp;
  CLI::App* spectra = app.add_subcommand("spectra", "Exact bilinear extragradient rate for given stepsizes or a preset");
  spectra->add_option("--sigma-max", sp.sigma_max, "Largest singular value of B");
  spectra->add_option("--sigma-min", sp.sigma_min, "Smallest singular value of B");
  spectra->add_option("--matrix", sp.matrix, "JSON file holding B as a nested array");
  spectra->add_option("--config", sp.config, "Bilinear experiment config (uses the mean B)");
  spectra->add_option("--eta1", sp.eta1, "Extrapolation stepsize");
  spectra->add_option("--eta2", sp.eta2, "Update stepsize");
  spectra->add_option("--preset", sp.preset, "Stepsize preset 1 or 2");
  spectra->add_option("--out", sp.out, "Write the report as JSON to this file");

  HeatmapArgs hm;
  CLI::App* heatmap = app.add_subcommand("heatmap", "Momentum spectral-radius ratio grid; writes ratio, radius and mask CSVs");
  heatmap->add_option("--mode", hm.mode, "beta1_vs_etasigma, beta2_vs_etasigma or beta1_vs_beta2");
  heatmap->add_option("--x-lo", hm.x_lo, "First column value");
  heatmap->add_option("--x-hi", hm.x_hi, "Last column value");
  heatmap->add_option("--x-steps", hm.x_steps, "Number of columns");
  heatmap->add_option("--y-lo", hm.y_lo, "First row value");
  heatmap->add_option("--y-hi", hm.y_hi, "Last row value");
  heatmap->add_option("--y-steps", hm.y_steps, "Number of rows");
  heatmap->add_option("--eta-sigma", hm.eta_sigma, "Fixed eta*sigma for beta1_vs_beta2");
  heatmap->add_option("--out", hm.out, "Output path prefix");
  heatmap->add_option("--threads", threads, "Worker threads");

  VerifyArgs va;
  CLI::App* verify = app.add_subcommand("verify", "Run verification checks; exit 1 if any fails");
  verify->add_option("--suite", va.suite, "Suite name or 'all'");
  verify->add_option("--out", va.out, "Write JSONL reports here (default stdout, table to stderr)");
  verify->add_option("--threads", threads, "Worker threads");

  SweepArgs sw;
  CLI::App* sweep = app.add_subcommand("sweep", "Grid over one stepsize or momentum parameter; writes sweep.csv");
  sweep->add_option("--config", sw.config, "Experiment config (JSON)")->required();
  sweep->add_option("--param", sw.param, "eta, eta1, eta2, eta_times_L, beta1 or beta2")->required();
  sweep->add_option("--values", sw.values, "Comma-separated values");
  sweep->add_option("--range", sw.range, "LO:HI:STEPS inclusive grid");
  sweep->add_option("--out", sw.out, "Output directory (default: output.directory)");
  sweep->add_option("--seeds", sw.seeds, "Seeds as a list '1,2,3' or 'N:BASE'");
  sweep->add_option("--threads", threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_args, threads);
    if (spectra->parsed()) {
      const bool sigmas = spectra->count("--sigma-max") > 0 || spectra->count("--sigma-min") > 0;
      if (sigmas && (spectra->count("--sigma-max") == 0 || spectra->count("--sigma-min") == 0))
        throw UsageError("--sigma-max and --sigma-min go together");
      const bool steps = spectra->count("--eta1") > 0 || spectra->count("--eta2") > 0;
      if (steps && (spectra->count("--eta1") == 0 || spectra->count("--eta2") == 0))
        throw UsageError("--eta1 and --eta2 go together");
      return cmd_spectra(sp, sigmas, steps);
    }
    if (heatmap->parsed()) return cmd_heatmap(hm, *heatmap, threads);
    if (verify->parsed()) return cmd_verify(va, threads);
    if (sweep->parsed()) return cmd_sweep(sw, threads);
  } catch (const eg::ConfigError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kExitUsage;
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
