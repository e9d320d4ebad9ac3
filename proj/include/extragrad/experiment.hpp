#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "extragrad/objectives.hpp"
#include "extragrad/problems.hpp"
#include "extragrad/solvers.hpp"

namespace extragrad {

// ---------------------------------------------------------------------------
// Records

/// Iterations at which metrics are written. stride 0 keeps every iteration up
/// to 10^4 iterations and 100 log-spaced points per decade beyond; a positive
/// stride keeps every stride-th. t = 0 and last_t are always kept.
std::vector<std::size_t> checkpoint_iterations(std::size_t last_t, std::size_t stride = 0);

/// Shortest round-trip text of a double ("nan", "inf", "-inf" for non-finite).
std::string format_double(double v);

/// "t,dist_sq,op_norm" plus ",gap" when requested.
std::string csv_header(bool include_gap);

/// Header row plus one row per kept checkpoint, '\n' line ends.
void write_csv(std::ostream& os, const RunRecord& rec, const std::vector<std::size_t>& iterations,
               bool include_gap);

/// One header object (config, seed, problem description), one object per kept
/// checkpoint, then one summary object.
void write_jsonl(std::ostream& os, const RunRecord& rec, const std::vector<std::size_t>& iterations,
                 bool include_gap, std::string_view problem_json);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// ---------------------------------------------------------------------------
// Configuration

/// Parse or validation failure. field is a dotted path such as
/// "methods[0].eta1"; line and column are set for syntax errors.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message, std::size_t line = 0, std::size_t column = 0);
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string field_;
  std::size_t line_;
  std::size_t column_;
};

enum class ProblemKind { Bilinear, StronglyMonotoneVI, Nonconvex };
std::string problem_kind_name(ProblemKind k);

/// Finite-sum bilinear instance, "gaussian" distribution.
struct BilinearGenerator {
  std::size_t dim = 20;
  std::size_t components = 10;
  std::uint64_t seed = 0;
  bool noise_at_optimum = false;
  bool planted_solution = false;
  double linear_term_scale = 1.0;
  friend bool operator==(const BilinearGenerator&, const BilinearGenerator&) = default;
};

/// One component x^T B y + a^T x + b^T y given inline.
struct BilinearComponentSpec {
  Matrix b_matrix;
  Vector a;
  Vector b;
  friend bool operator==(const BilinearComponentSpec&, const BilinearComponentSpec&) = default;
};

/// Strongly monotone affine VI with g = (mu/2)||x||^2, "gaussian" distribution.
struct MonotoneGenerator {
  std::size_t dim = 8;
  std::size_t components = 10;
  std::uint64_t seed = 0;
  double symmetric_weight = 1.0;
  double skew_weight = 1.0;
  double mu = 1.0;
  double noise_scale = 0.0;
  friend bool operator==(const MonotoneGenerator&, const MonotoneGenerator&) = default;
};

struct InlineMonotone {
  double mu = 1.0;
  std::vector<AffineComponent> components;
  friend bool operator==(const InlineMonotone&, const InlineMonotone&) = default;
};

/// Finite-sum convex quadratic, "quadratic" distribution.
struct QuadraticGenerator {
  std::size_t dim = 5;
  std::size_t components = 10;
  std::uint64_t seed = 0;
  double eig_lo = 0.5;
  double eig_hi = 1.0;
  double shift_scale = 1.0;
  friend bool operator==(const QuadraticGenerator&, const QuadraticGenerator&) = default;
};

/// Separable double well with Gaussian gradient noise, "quartic" distribution.
struct QuarticGenerator {
  std::size_t dim = 5;
  double noise_std = 0.5;
  double region = 1.5;
  friend bool operator==(const QuarticGenerator&, const QuarticGenerator&) = default;
};

/// x0 = values when given, otherwise reference + scale * N(0, I) drawn from
/// Rng(seed), where reference is the known solution or the origin.
struct InitialPoint {
  double scale = 1.0;
  std::uint64_t seed = 1;
  Vector values;
  friend bool operator==(const InitialPoint&, const InitialPoint&) = default;
};

struct ProblemConfig {
  ProblemKind kind = ProblemKind::Bilinear;
  std::variant<BilinearGenerator, std::vector<BilinearComponentSpec>, MonotoneGenerator, InlineMonotone,
               QuadraticGenerator, QuarticGenerator>
      source;
  InitialPoint initial_point;
  friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

/// A method entry. With eta_times_l set, eta1 = eta2 = eta_times_l / L is
/// resolved against the instance at run time.
struct MethodSpec {
  MethodConfig config;
  std::optional<double> eta_times_l;
  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

struct GapOutput {
  std::size_t stride = 0;  // 0 disables the gap column
  double radius = 1.0;     // ball around the solution (or x0 without one)
  friend bool operator==(const GapOutput&, const GapOutput&) = default;
};

struct OutputConfig {
  std::string directory = "out";
  std::size_t checkpoint_stride = 0;  // 0 selects default thinning
  std::vector<std::string> formats{"csv", "jsonl"};
  GapOutput gap;
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

/// Either an explicit list or count consecutive seeds starting at base.
struct SeedsConfig {
  std::vector<std::uint64_t> list{0};
  bool counted = false;
  std::size_t count = 0;
  std::uint64_t base = 0;

  std::vector<std::uint64_t> values() const;
  friend bool operator==(const SeedsConfig&, const SeedsConfig&) = default;
};

/// Parses "1,2,3" (list) or "N:B" (N seeds from B).
SeedsConfig parse_seeds(std::string_view text);

struct ExperimentConfig {
  ProblemConfig problem;
  std::vector<MethodSpec> methods;
  OutputConfig output;
  SeedsConfig seeds;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Strict JSON parsing: unknown keys, wrong types and invalid values raise
/// ConfigError naming the field. The result has been validated.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON (every field explicit, two-space indent). parse_config of
/// the result reproduces the config exactly.
std::string serialize_config(const ExperimentConfig& c);

/// Semantic checks shared by parsing and programmatic construction.
void validate_config(const ExperimentConfig& c);

// ---------------------------------------------------------------------------
// Instances and runs

struct Instance {
  ProblemKind kind = ProblemKind::Bilinear;
  std::optional<VIProblem> vi;                     // bilinear and strongly monotone kinds
  std::shared_ptr<StochasticObjective> objective;  // nonconvex kind
  Vector x0;
  double lipschitz = 0.0;
  std::string description_json;  // compact JSON object
};

Instance build_instance(const ProblemConfig& p);

/// Method config with stepsizes resolved and the seed applied.
MethodConfig resolve_method(const MethodSpec& m, const Instance& inst, std::uint64_t seed);

RunRecord run_method(const Instance& inst, const MethodConfig& cfg, const GapOutput& gap);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string label;
  std::string method;
  std::uint64_t seed = 0;
  std::string format;
  std::size_t bytes = 0;
  std::string fnv1a64;
};

/// Writes manifest.json listing entries (sorted by path) with the config.
void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& c,
                    const std::vector<ManifestEntry>& entries, std::string_view command);

/// One file per (method, seed, format) plus manifest.json. formats overrides
/// c.output.formats when non-empty. Returns the manifest entries.
std::vector<ManifestEntry> run_experiment(const ExperimentConfig& c, const std::filesystem::path& dir,
                                          std::size_t threads, const std::vector<std::string>& formats = {});

/// Parameter grid over a fixed problem: every method x value x seed is run
/// and summarized in sweep.csv.
struct SweepSpec {
  std::string parameter;  // eta, eta1, eta2, eta_times_L, beta1, beta2
  Vector values;
};

std::vector<ManifestEntry> run_sweep(const ExperimentConfig& c, const SweepSpec& s, const std::filesystem::path& dir,
                                     std::size_t threads);

}  // namespace extragrad
