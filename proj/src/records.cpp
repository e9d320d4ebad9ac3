#include <cmath>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "extragrad/experiment.hpp"

namespace extragrad {

namespace {

constexpr std::size_t kDenseLimit = 10000;
constexpr int kPointsPerDecade = 100;

nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::vector<std::size_t> checkpoint_iterations(std::size_t last_t, std::size_t stride) {
  std::set<std::size_t> keep{0, last_t};
  if (stride > 0) {
    for (std::size_t t = 0; t <= last_t; t += stride) keep.insert(t);
  } else if (last_t <= kDenseLimit) {
    for (std::size_t t = 0; t <= last_t; ++t) keep.insert(t);
  } else {
    for (int j = 0;; ++j) {
      const double v = std::pow(10.0, static_cast<double>(j) / kPointsPerDecade);
      const auto t = static_cast<std::size_t>(std::llround(v));
      if (t > last_t) break;
      keep.insert(t);
    }
  }
  return {keep.begin(), keep.end()};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

std::string csv_header(bool include_gap) { return include_gap ? "t,dist_sq,op_norm,gap" : "t,dist_sq,op_norm"; }

void write_csv(std::ostream& os, const RunRecord& rec, const std::vector<std::size_t>& iterations,
               bool include_gap) {
  os << csv_header(include_gap) << '\n';
  for (std::size_t t : iterations) {
    if (t >= rec.metrics.size()) break;
    const MetricPoint& m = rec.metrics[t];
    os << m.t << ',' << format_double(m.dist_sq) << ',' << format_double(m.op_norm);
    if (include_gap) os << ',' << format_double(m.gap);
    os << '\n';
  }
}

void write_jsonl(std::ostream& os, const RunRecord& rec, const std::vector<std::size_t>& iterations,
                 bool include_gap, std::string_view problem_json) {
  const MethodConfig& c = rec.config;
  nlohmann::ordered_json header;
  header["type"] = "header";
  header["label"] = c.display_name();
  header["config"] = {{"method", method_name(c.method)}, {"eta1", c.eta1},       {"eta2", c.eta2},
                      {"beta1", c.beta1},                {"beta2", c.beta2},     {"k", c.k},
                      {"iterations", c.iterations},      {"averaging", c.averaging}};
  header["seed"] = c.seed;
  header["problem"] = problem_json.empty() ? nlohmann::ordered_json::object()
                                           : nlohmann::ordered_json::parse(problem_json);
  os << header.dump() << '\n';
  for (std::size_t t : iterations) {
    if (t >= rec.metrics.size()) break;
    const MetricPoint& m = rec.metrics[t];
    nlohmann::ordered_json row;
    row["type"] = "checkpoint";
    row["t"] = m.t;
    row["dist_sq"] = number(m.dist_sq);
    row["op_norm"] = number(m.op_norm);
    if (include_gap) row["gap"] = number(m.gap);
    os << row.dump() << '\n';
  }
  nlohmann::ordered_json summary;
  summary["type"] = "summary";
  summary["iterations_completed"] = rec.iterations_completed;
  summary["diverged"] = rec.diverged;
  summary["diverged_at"] = rec.diverged_at ? nlohmann::ordered_json(*rec.diverged_at) : nullptr;
  summary["samples"] = rec.counters.samples;
  summary["evaluations"] = rec.counters.evaluations;
  os << summary.dump() << '\n';
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) { return fmt::format("{:016x}", fnv1a64(bytes)); }

}  // namespace extragrad
