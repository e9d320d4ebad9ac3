#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "extragrad/verify.hpp"

namespace extragrad {

bool TheoremCheckReport::record(std::string label, double lhs, double rhs, double tol, bool keep) {
  const bool ok = lhs <= rhs + tol;  // false for NaN
  const double slack = rhs + tol - lhs;
  if (checked == 0 || !(slack >= worst_slack)) worst_slack = std::isnan(slack) ? -std::numeric_limits<double>::infinity() : slack;
  ++checked;
  if (!ok) {
    ++violations;
    passed = false;
  }
  if (keep || !ok) checkpoints.push_back({std::move(label), lhs, rhs, tol, ok});
  return ok;
}

bool TheoremCheckReport::require(std::string label, bool condition) {
  ++checked;
  if (!condition) {
    ++violations;
    passed = false;
  }
  checkpoints.push_back({std::move(label), condition ? 0.0 : 1.0, 0.0, 0.0, condition});
  return condition;
}

void TheoremCheckReport::measure(std::string key, double value) { measured.emplace_back(std::move(key), value); }

std::string TheoremCheckReport::to_json() const {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["verdict"] = passed ? "pass" : "fail";
  j["instance"] = instance;
  j["inequality"] = inequality;
  j["checked"] = checked;
  j["violations"] = violations;
  j["worst_slack"] = worst_slack;
  j["seconds"] = seconds;
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const auto& [k, v] : measured) m[k] = v;
  j["measured"] = m;
  nlohmann::ordered_json cps = nlohmann::ordered_json::array();
  for (const Checkpoint& c : checkpoints)
    cps.push_back({{"label", c.label}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"tolerance", c.tolerance}, {"ok", c.ok}});
  j["checkpoints"] = cps;
  j["notes"] = notes;
  return j.dump();
}

std::string summary_table(const std::vector<TheoremCheckReport>& reports) {
  std::string out = fmt::format("{:<22} {:<7} {:>9} {:>10} {:>13} {:>9}\n", "check", "verdict", "checked",
                                "violations", "worst_slack", "seconds");
  for (const TheoremCheckReport& r : reports) {
    out += fmt::format("{:<22} {:<7} {:>9} {:>10} {:>13.4e} {:>9.2f}\n", r.id, r.passed ? "pass" : "FAIL",
                       r.checked, r.violations, r.worst_slack, r.seconds);
  }
  return out;
}

}  // namespace extragrad
