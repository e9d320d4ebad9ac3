#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "extragrad/experiment.hpp"

namespace extragrad {

using json = nlohmann::ordered_json;

ConfigError::ConfigError(std::string field, const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(line > 0 ? fmt::format("config error at line {}, column {}: {}", line, column, message)
                                  : fmt::format("config error at {}: {}", field.empty() ? "<root>" : field, message)),
      field_(std::move(field)),
      line_(line),
      column_(column) {}

std::string problem_kind_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::Bilinear: return "bilinear";
    case ProblemKind::StronglyMonotoneVI: return "strongly-monotone-vi";
    case ProblemKind::Nonconvex: return "nonconvex";
  }
  return "unknown";
}

std::vector<std::uint64_t> SeedsConfig::values() const {
  if (!counted) return list;
  std::vector<std::uint64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = base + i;
  return out;
}

namespace {

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

// Strict view of one JSON object: typed getters record the keys they read and
// finish() rejects everything else.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string child(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }
  bool has(const char* key) const { return j_.contains(key); }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const char* key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(child(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(child(key), "must be finite");
    return d;
  }

  std::uint64_t unsigned_int(const char* key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(child(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const char* key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(child(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const char* key, std::string fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(child(key), "expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.contains(it.key())) throw ConfigError(child(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Vector to_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  Vector v;
  v.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(fmt::format("{}[{}]", path, i), "expected a number");
    v.push_back(j[i].get<double>());
    if (!std::isfinite(v.back())) throw ConfigError(fmt::format("{}[{}]", path, i), "must be finite");
  }
  return v;
}

Matrix to_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of rows");
  std::vector<double> data;
  std::size_t cols = 0;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rp = fmt::format("{}[{}]", path, r);
    const Vector row = to_vector(j[r], rp);
    if (r == 0) cols = row.size();
    if (row.empty() || row.size() != cols) throw ConfigError(rp, "rows must be non-empty and of equal length");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(j.size(), cols, std::move(data));
}

json from_matrix(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(json(std::vector<double>(row.begin(), row.end())));
  }
  return rows;
}

std::size_t dimension_of(const ProblemConfig& p) {
  return std::visit(
      [](const auto& s) -> std::size_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BilinearGenerator>) {
          return 2 * s.dim;
        } else if constexpr (std::is_same_v<T, std::vector<BilinearComponentSpec>>) {
          return s.empty() ? 0 : 2 * s.front().b_matrix.rows();
        } else if constexpr (std::is_same_v<T, InlineMonotone>) {
          return s.components.empty() ? 0 : s.components.front().a.rows();
        } else {
          return s.dim;
        }
      },
      p.source);
}

// ---------------------------------------------------------------------------
// Parsing

ProblemConfig parse_problem(const json& j) {
  ObjectReader r(j, "problem");
  ProblemConfig p;
  const std::string kind = r.string("kind", "");
  if (kind == "bilinear") {
    p.kind = ProblemKind::Bilinear;
  } else if (kind == "strongly-monotone-vi") {
    p.kind = ProblemKind::StronglyMonotoneVI;
  } else if (kind == "nonconvex") {
    p.kind = ProblemKind::Nonconvex;
  } else {
    throw ConfigError("problem.kind", "expected bilinear, strongly-monotone-vi or nonconvex");
  }
  const bool gen = r.has("generator"), inl = r.has("inline");
  if (gen == inl) throw ConfigError("problem", "exactly one of generator or inline is required");

  if (gen) {
    ObjectReader g(r.raw("generator"), "problem.generator");
    const std::string dist = g.string("distribution", p.kind == ProblemKind::Nonconvex ? "" : "gaussian");
    if (p.kind == ProblemKind::Bilinear) {
      if (dist != "gaussian") throw ConfigError("problem.generator.distribution", "bilinear supports gaussian");
      BilinearGenerator b;
      b.dim = g.unsigned_int("dim", b.dim);
      b.components = g.unsigned_int("components", b.components);
      b.seed = g.unsigned_int("seed", b.seed);
      b.noise_at_optimum = g.boolean("noise_at_optimum", b.noise_at_optimum);
      b.planted_solution = g.boolean("planted_solution", b.planted_solution);
      b.linear_term_scale = g.number("linear_term_scale", b.linear_term_scale);
      p.source = b;
    } else if (p.kind == ProblemKind::StronglyMonotoneVI) {
      if (dist != "gaussian")
        throw ConfigError("problem.generator.distribution", "strongly-monotone-vi supports gaussian");
      MonotoneGenerator m;
      m.dim = g.unsigned_int("dim", m.dim);
      m.components = g.unsigned_int("components", m.components);
      m.seed = g.unsigned_int("seed", m.seed);
      m.symmetric_weight = g.number("symmetric_weight", m.symmetric_weight);
      m.skew_weight = g.number("skew_weight", m.skew_weight);
      m.mu = g.number("mu", m.mu);
      m.noise_scale = g.number("noise_scale", m.noise_scale);
      p.source = m;
    } else if (dist == "quadratic") {
      QuadraticGenerator q;
      q.dim = g.unsigned_int("dim", q.dim);
      q.components = g.unsigned_int("components", q.components);
      q.seed = g.unsigned_int("seed", q.seed);
      q.eig_lo = g.number("eig_lo", q.eig_lo);
      q.eig_hi = g.number("eig_hi", q.eig_hi);
      q.shift_scale = g.number("shift_scale", q.shift_scale);
      p.source = q;
    } else if (dist == "quartic") {
      QuarticGenerator q;
      q.dim = g.unsigned_int("dim", q.dim);
      q.noise_std = g.number("noise_std", q.noise_std);
      q.region = g.number("region", q.region);
      p.source = q;
    } else {
      throw ConfigError("problem.generator.distribution", "nonconvex supports quadratic or quartic");
    }
    g.finish();
  } else {
    ObjectReader in(r.raw("inline"), "problem.inline");
    if (p.kind == ProblemKind::Nonconvex) throw ConfigError("problem.inline", "nonconvex problems use a generator");
    if (!in.has("components")) throw ConfigError("problem.inline.components", "required");
    const json& comps = in.raw("components");
    if (!comps.is_array() || comps.empty())
      throw ConfigError("problem.inline.components", "expected a non-empty array");
    if (p.kind == ProblemKind::Bilinear) {
      std::vector<BilinearComponentSpec> specs;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string cp = fmt::format("problem.inline.components[{}]", i);
        ObjectReader c(comps[i], cp);
        BilinearComponentSpec s;
        if (!c.has("B")) throw ConfigError(cp + ".B", "required");
        s.b_matrix = to_matrix(c.raw("B"), cp + ".B");
        const std::size_t m = s.b_matrix.rows();
        s.a = c.has("a") ? to_vector(c.raw("a"), cp + ".a") : Vector(m, 0.0);
        s.b = c.has("b") ? to_vector(c.raw("b"), cp + ".b") : Vector(m, 0.0);
        c.finish();
        specs.push_back(std::move(s));
      }
      p.source = std::move(specs);
    } else {
      InlineMonotone m;
      m.mu = in.number("mu", m.mu);
      for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string cp = fmt::format("problem.inline.components[{}]", i);
        ObjectReader c(comps[i], cp);
        AffineComponent a;
        if (!c.has("A")) throw ConfigError(cp + ".A", "required");
        a.a = to_matrix(c.raw("A"), cp + ".A");
        a.c = c.has("c") ? to_vector(c.raw("c"), cp + ".c") : Vector(a.a.rows(), 0.0);
        c.finish();
        m.components.push_back(std::move(a));
      }
      p.source = std::move(m);
    }
    in.finish();
  }

  if (r.has("initial_point")) {
    ObjectReader ip(r.raw("initial_point"), "problem.initial_point");
    p.initial_point.scale = ip.number("scale", p.initial_point.scale);
    p.initial_point.seed = ip.unsigned_int("seed", p.initial_point.seed);
    if (ip.has("values")) p.initial_point.values = to_vector(ip.raw("values"), "problem.initial_point.values");
    ip.finish();
  }
  r.finish();
  return p;
}

MethodSpec parse_method_entry(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  MethodSpec m;
  const std::string name = r.string("method", "");
  const auto method = parse_method(name);
  if (!method)
    throw ConfigError(r.child("method"),
                      "expected one of seg_same, seg_independent, sgda, momentum_eg, kstep_eg, implicit");
  m.config.method = *method;
  m.config.label = r.string("label", "");
  const bool has_eta = r.has("eta"), has_pair = r.has("eta1") || r.has("eta2"), has_l = r.has("eta_times_L");
  if (static_cast<int>(has_eta) + static_cast<int>(has_pair) + static_cast<int>(has_l) > 1)
    throw ConfigError(path, "give only one of eta, eta1/eta2 or eta_times_L");
  if (has_eta) {
    m.config.eta1 = m.config.eta2 = r.number("eta", 0.0);
  } else if (has_l) {
    m.eta_times_l = r.number("eta_times_L", 0.0);
    m.config.eta1 = m.config.eta2 = 0.0;
  } else {
    m.config.eta1 = r.number("eta1", m.config.eta1);
    m.config.eta2 = r.number("eta2", has_pair && !r.has("eta2") ? m.config.eta1 : m.config.eta2);
  }
  m.config.beta1 = r.number("beta1", 0.0);
  m.config.beta2 = r.number("beta2", 0.0);
  m.config.k = r.unsigned_int("k", 1);
  m.config.iterations = r.unsigned_int("iterations", m.config.iterations);
  m.config.averaging = r.boolean("averaging", false);
  r.finish();
  return m;
}

OutputConfig parse_output(const json& j) {
  ObjectReader r(j, "output");
  OutputConfig o;
  o.directory = r.string("directory", o.directory);
  o.checkpoint_stride = r.unsigned_int("checkpoint_stride", o.checkpoint_stride);
  if (r.has("formats")) {
    const json& f = r.raw("formats");
    if (!f.is_array()) throw ConfigError("output.formats", "expected an array of strings");
    o.formats.clear();
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!f[i].is_string()) throw ConfigError(fmt::format("output.formats[{}]", i), "expected a string");
      o.formats.push_back(f[i].get<std::string>());
    }
  }
  if (r.has("gap")) {
    ObjectReader g(r.raw("gap"), "output.gap");
    o.gap.stride = g.unsigned_int("stride", o.gap.stride);
    o.gap.radius = g.number("radius", o.gap.radius);
    g.finish();
  }
  r.finish();
  return o;
}

SeedsConfig parse_seeds_json(const json& j) {
  SeedsConfig s;
  if (j.is_array()) {
    s.list.clear();
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number_unsigned()) throw ConfigError(fmt::format("seeds[{}]", i), "expected a non-negative integer");
      s.list.push_back(j[i].get<std::uint64_t>());
    }
    return s;
  }
  ObjectReader r(j, "seeds");
  s.counted = true;
  s.list.clear();
  if (!r.has("count")) throw ConfigError("seeds.count", "required");
  s.count = r.unsigned_int("count", 0);
  s.base = r.unsigned_int("base", 0);
  r.finish();
  return s;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// ---------------------------------------------------------------------------
// Validation helpers

void require(bool cond, const std::string& field, const std::string& message) {
  if (!cond) throw ConfigError(field, message);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

bool filename_safe(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_' ||
                    ch == '-' || ch == '.';
    if (!ok) return false;
  }
  return s != "." && s != "..";
}

void validate_problem(const ProblemConfig& p) {
  const auto gen = std::string("problem.generator.");
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BilinearGenerator>) {
          require(p.kind == ProblemKind::Bilinear, "problem.kind", "does not match the generator");
          require(s.dim >= 1, gen + "dim", "must be >= 1");
          require(s.components >= 1, gen + "components", "must be >= 1");
          require(s.linear_term_scale >= 0.0, gen + "linear_term_scale", "must be >= 0");
        } else if constexpr (std::is_same_v<T, std::vector<BilinearComponentSpec>>) {
          require(p.kind == ProblemKind::Bilinear, "problem.kind", "does not match the inline data");
          require(!s.empty(), "problem.inline.components", "must be non-empty");
          const std::size_t m = s.front().b_matrix.rows();
          for (std::size_t i = 0; i < s.size(); ++i) {
            const std::string cp = fmt::format("problem.inline.components[{}]", i);
            require(s[i].b_matrix.rows() == m && s[i].b_matrix.cols() == m, cp + ".B",
                    fmt::format("must be {0}x{0} like the first component", m));
            require(s[i].a.size() == m, cp + ".a", fmt::format("must have {} entries", m));
            require(s[i].b.size() == m, cp + ".b", fmt::format("must have {} entries", m));
          }
        } else if constexpr (std::is_same_v<T, MonotoneGenerator>) {
          require(p.kind == ProblemKind::StronglyMonotoneVI, "problem.kind", "does not match the generator");
          require(s.dim >= 1, gen + "dim", "must be >= 1");
          require(s.components >= 1, gen + "components", "must be >= 1");
          require(s.symmetric_weight >= 0.0, gen + "symmetric_weight", "must be >= 0");
          require(s.skew_weight >= 0.0, gen + "skew_weight", "must be >= 0");
          require(positive(s.mu), gen + "mu", "must be > 0");
          require(s.noise_scale >= 0.0, gen + "noise_scale", "must be >= 0");
        } else if constexpr (std::is_same_v<T, InlineMonotone>) {
          require(p.kind == ProblemKind::StronglyMonotoneVI, "problem.kind", "does not match the inline data");
          require(positive(s.mu), "problem.inline.mu", "must be > 0");
          require(!s.components.empty(), "problem.inline.components", "must be non-empty");
          const std::size_t d = s.components.front().a.rows();
          for (std::size_t i = 0; i < s.components.size(); ++i) {
            const std::string cp = fmt::format("problem.inline.components[{}]", i);
            require(s.components[i].a.rows() == d && s.components[i].a.cols() == d, cp + ".A",
                    fmt::format("must be {0}x{0} like the first component", d));
            require(s.components[i].c.size() == d, cp + ".c", fmt::format("must have {} entries", d));
          }
        } else if constexpr (std::is_same_v<T, QuadraticGenerator>) {
          require(p.kind == ProblemKind::Nonconvex, "problem.kind", "does not match the generator");
          require(s.dim >= 1, gen + "dim", "must be >= 1");
          require(s.components >= 1, gen + "components", "must be >= 1");
          require(s.eig_lo >= 0.0, gen + "eig_lo", "must be >= 0");
          require(s.eig_hi >= s.eig_lo && s.eig_hi > 0.0, gen + "eig_hi", "must be > 0 and >= eig_lo");
          require(s.shift_scale >= 0.0, gen + "shift_scale", "must be >= 0");
        } else {
          require(p.kind == ProblemKind::Nonconvex, "problem.kind", "does not match the generator");
          require(s.dim >= 1, gen + "dim", "must be >= 1");
          require(s.noise_std >= 0.0, gen + "noise_std", "must be >= 0");
          require(std::isfinite(s.region) && s.region > 1.0, gen + "region", "must be > 1");
        }
      },
      p.source);
  require(std::isfinite(p.initial_point.scale) && p.initial_point.scale >= 0.0, "problem.initial_point.scale",
          "must be >= 0");
  if (!p.initial_point.values.empty())
    require(p.initial_point.values.size() == dimension_of(p), "problem.initial_point.values",
            fmt::format("must have {} entries", dimension_of(p)));
}

void validate_method(const MethodSpec& m, const ProblemConfig& p, const std::string& path) {
  const MethodConfig& c = m.config;
  if (m.eta_times_l) {
    require(positive(*m.eta_times_l), path + ".eta_times_L", "stepsize must be > 0");
  } else {
    require(positive(c.eta1), path + ".eta1", "stepsize must be > 0");
    require(positive(c.eta2), path + ".eta2", "stepsize must be > 0");
  }
  require(c.beta1 > -1.0 && c.beta1 < 1.0, path + ".beta1", "must lie in (-1, 1)");
  require(c.beta2 > -1.0 && c.beta2 < 1.0, path + ".beta2", "must lie in (-1, 1)");
  require(c.k >= 1, path + ".k", "must be >= 1");
  if (c.method != Method::MomentumEg) {
    require(c.beta1 == 0.0, path + ".beta1", "momentum applies to momentum_eg only");
    require(c.beta2 == 0.0, path + ".beta2", "momentum applies to momentum_eg only");
  }
  if (c.method == Method::MomentumEg)
    require(p.kind == ProblemKind::Bilinear, path + ".method", "momentum_eg needs an unregularized (bilinear) problem");
  if (p.kind == ProblemKind::Nonconvex) {
    require(c.method == Method::SegSame, path + ".method", "nonconvex problems support seg_same only");
    require(m.eta_times_l || c.eta1 == c.eta2, path + ".eta2", "nonconvex runs use a single stepsize");
    require(!c.averaging, path + ".averaging", "not available for nonconvex problems");
  }
  if (!c.label.empty()) require(filename_safe(c.label), path + ".label", "use letters, digits, '_', '-' or '.'");
}

// ---------------------------------------------------------------------------
// Serialization

json problem_json(const ProblemConfig& p) {
  json j;
  j["kind"] = problem_kind_name(p.kind);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BilinearGenerator>) {
          j["generator"] = {{"distribution", "gaussian"},
                            {"dim", s.dim},
                            {"components", s.components},
                            {"seed", s.seed},
                            {"noise_at_optimum", s.noise_at_optimum},
                            {"planted_solution", s.planted_solution},
                            {"linear_term_scale", s.linear_term_scale}};
        } else if constexpr (std::is_same_v<T, std::vector<BilinearComponentSpec>>) {
          json comps = json::array();
          for (const auto& c : s) comps.push_back({{"B", from_matrix(c.b_matrix)}, {"a", c.a}, {"b", c.b}});
          j["inline"] = {{"components", comps}};
        } else if constexpr (std::is_same_v<T, MonotoneGenerator>) {
          j["generator"] = {{"distribution", "gaussian"},
                            {"dim", s.dim},
                            {"components", s.components},
                            {"seed", s.seed},
                            {"symmetric_weight", s.symmetric_weight},
                            {"skew_weight", s.skew_weight},
                            {"mu", s.mu},
                            {"noise_scale", s.noise_scale}};
        } else if constexpr (std::is_same_v<T, InlineMonotone>) {
          json comps = json::array();
          for (const auto& c : s.components) comps.push_back({{"A", from_matrix(c.a)}, {"c", c.c}});
          j["inline"] = {{"mu", s.mu}, {"components", comps}};
        } else if constexpr (std::is_same_v<T, QuadraticGenerator>) {
          j["generator"] = {{"distribution", "quadratic"}, {"dim", s.dim},       {"components", s.components},
                            {"seed", s.seed},              {"eig_lo", s.eig_lo}, {"eig_hi", s.eig_hi},
                            {"shift_scale", s.shift_scale}};
        } else {
          j["generator"] = {
              {"distribution", "quartic"}, {"dim", s.dim}, {"noise_std", s.noise_std}, {"region", s.region}};
        }
      },
      p.source);
  json ip = {{"scale", p.initial_point.scale}, {"seed", p.initial_point.seed}};
  if (!p.initial_point.values.empty()) ip["values"] = p.initial_point.values;
  j["initial_point"] = ip;
  return j;
}

json method_json(const MethodSpec& m) {
  const MethodConfig& c = m.config;
  json j;
  j["method"] = method_name(c.method);
  if (!c.label.empty()) j["label"] = c.label;
  if (m.eta_times_l) {
    j["eta_times_L"] = *m.eta_times_l;
  } else {
    j["eta1"] = c.eta1;
    j["eta2"] = c.eta2;
  }
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["k"] = c.k;
  j["iterations"] = c.iterations;
  j["averaging"] = c.averaging;
  return j;
}

}  // namespace

SeedsConfig parse_seeds(std::string_view text) {
  SeedsConfig s;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    const auto n = parse_u64(text.substr(0, colon));
    const auto b = parse_u64(text.substr(colon + 1));
    if (!n || !b || *n == 0) throw ConfigError("seeds", fmt::format("expected N:BASE with N >= 1, got '{}'", text));
    s.counted = true;
    s.list.clear();
    s.count = *n;
    s.base = *b;
    return s;
  }
  s.list.clear();
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto part = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    const auto v = parse_u64(part);
    if (!v) throw ConfigError("seeds", fmt::format("expected a comma-separated list of integers, got '{}'", text));
    s.list.push_back(*v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return s;
}

void validate_config(const ExperimentConfig& c) {
  validate_problem(c.problem);
  require(!c.methods.empty(), "methods", "at least one method is required");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < c.methods.size(); ++i) {
    const std::string path = fmt::format("methods[{}]", i);
    validate_method(c.methods[i], c.problem, path);
    const std::string label = c.methods[i].config.display_name();
    require(labels.insert(label).second, path + ".label",
            fmt::format("duplicate label '{}'; give each entry a distinct label", label));
  }
  require(!c.output.directory.empty(), "output.directory", "must be non-empty");
  require(!c.output.formats.empty(), "output.formats", "must name csv and/or jsonl");
  std::set<std::string> formats;
  for (std::size_t i = 0; i < c.output.formats.size(); ++i) {
    const std::string& f = c.output.formats[i];
    require(f == "csv" || f == "jsonl", fmt::format("output.formats[{}]", i), "expected csv or jsonl");
    require(formats.insert(f).second, fmt::format("output.formats[{}]", i), "duplicate format");
  }
  require(positive(c.output.gap.radius), "output.gap.radius", "must be > 0");
  if (c.output.gap.stride > 0)
    require(c.problem.kind != ProblemKind::Nonconvex, "output.gap.stride", "the gap applies to VI problems only");
  if (c.seeds.counted) {
    require(c.seeds.count >= 1, "seeds.count", "must be >= 1");
  } else {
    require(!c.seeds.list.empty(), "seeds", "must list at least one seed");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError("", fmt::format("invalid JSON ({})", e.what()), line, col);
  }
  ObjectReader root(j, "");
  ExperimentConfig c;
  if (!root.has("problem")) throw ConfigError("problem", "required");
  c.problem = parse_problem(root.raw("problem"));
  if (!root.has("methods")) throw ConfigError("methods", "required");
  const json& methods = root.raw("methods");
  if (!methods.is_array()) throw ConfigError("methods", "expected an array");
  for (std::size_t i = 0; i < methods.size(); ++i)
    c.methods.push_back(parse_method_entry(methods[i], fmt::format("methods[{}]", i)));
  if (root.has("output")) c.output = parse_output(root.raw("output"));
  if (root.has("seeds")) c.seeds = parse_seeds_json(root.raw("seeds"));
  root.finish();
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  j["problem"] = problem_json(c.problem);
  json methods = json::array();
  for (const MethodSpec& m : c.methods) methods.push_back(method_json(m));
  j["methods"] = methods;
  j["output"] = {{"directory", c.output.directory},
                 {"checkpoint_stride", c.output.checkpoint_stride},
                 {"formats", c.output.formats},
                 {"gap", {{"stride", c.output.gap.stride}, {"radius", c.output.gap.radius}}}};
  if (c.seeds.counted) {
    j["seeds"] = {{"count", c.seeds.count}, {"base", c.seeds.base}};
  } else {
    j["seeds"] = c.seeds.list;
  }
  return j.dump(2) + "\n";
}

}  // namespace extragrad
