#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "fmie/experiments.hpp"

namespace fmie {

std::string_view to_string(CheckKind kind) {
  switch (kind) {
    case CheckKind::Identity:
      return "identity";
    case CheckKind::Bound:
      return "bound";
    case CheckKind::Ks:
      return "ks";
    case CheckKind::Exploratory:
      return "exploratory";
  }
  return "identity";
}

namespace {

// Floor for tolerances when the Monte Carlo error is zero (degenerate
// statistics): rounding in the estimate or the target is not a failure.
double rounding_floor(double a, double b) {
  return 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

Check identity_check(std::string name, const SummaryStats& s, double target, double sigmas) {
  Check c{std::move(name), CheckKind::Identity, s.mean, target,
          std::max(sigmas * s.standard_error, rounding_floor(s.mean, target)), false};
  c.pass = std::abs(c.value - c.target) <= c.tolerance;
  return c;
}

Check joint_check(std::string name, const SummaryStats& a, const SummaryStats& b, double sigmas) {
  const double se = std::hypot(a.standard_error, b.standard_error);
  Check c{std::move(name), CheckKind::Identity, a.mean - b.mean, 0.0,
          std::max(sigmas * se, rounding_floor(a.mean, b.mean)), false};
  c.pass = std::abs(c.value) <= c.tolerance;
  return c;
}

Check upper_bound_check(std::string name, const SummaryStats& s, double bound, double sigmas) {
  Check c{std::move(name), CheckKind::Bound, s.mean - sigmas * s.standard_error, bound,
          sigmas * s.standard_error, false};
  c.pass = c.value <= bound + rounding_floor(bound, 0.0);
  return c;
}

Check ks_check(std::string name, const KsResult& r) {
  return Check{std::move(name), CheckKind::Ks, r.statistic, 0.0, r.critical, r.pass};
}

Check exact_check(std::string name, double value, double target, double tolerance) {
  Check c{std::move(name), CheckKind::Identity, value, target, tolerance, false};
  c.pass = std::abs(value - target) <= tolerance;
  return c;
}

bool SuiteReport::passed() const {
  for (const auto& c : checks) {
    if (c.kind != CheckKind::Exploratory && !c.pass) return false;
  }
  return true;
}

const Check* SuiteReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

// JSON has no infinity; encode non-finite numbers as null.
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

nlohmann::json SuiteReport::to_json() const {
  nlohmann::json j;
  j["schema"] = kReportSchemaVersion;
  j["suite"] = suite;
  j["params"] = params;
  j["passed"] = passed();
  auto& arr = j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"kind", to_string(c.kind)},
                   {"value", number(c.value)},
                   {"target", number(c.target)},
                   {"tolerance", number(c.tolerance)},
                   {"pass", c.pass}});
  }
  if (!series.empty()) j["series"] = series;
  return j;
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

void SuiteReport::write_csv(std::ostream& out) const {
  out << "suite,name,kind,value,target,tolerance,pass\n";
  out << std::setprecision(17);
  for (const auto& c : checks) {
    out << csv_field(suite) << ',' << csv_field(c.name) << ',' << to_string(c.kind) << ',' << c.value << ','
        << c.target << ',' << c.tolerance << ',' << (c.pass ? "true" : "false") << '\n';
  }
}

}  // namespace fmie
