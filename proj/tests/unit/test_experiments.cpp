#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fmie/experiments.hpp"

using namespace fmie;

TEST_CASE("window profile") {
  const auto p = solve_window_profile();
  CHECK(p(0.0) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(p.values.front() < 1e-6);
  CHECK(p.values.back() > 1 - 1e-6);
  for (std::size_t k = 1; k < p.values.size(); ++k) REQUIRE(p.values[k] >= p.values[k - 1]);
  CHECK(window_profile_residual(p) < 1e-8);

  WindowProfileOptions fine;
  fine.step /= 2;
  const auto q = solve_window_profile(fine);
  double gap = 0;
  for (double t = -6; t <= 4; t += 0.01) gap = std::max(gap, std::abs(p(t) - q(t)));
  CHECK(gap < 1e-8);

  // Independent check of the equation at a few points with a composite
  // Simpson rule on a much finer grid of the interpolated profile.
  for (double t : {-2.0, -0.5, 0.0, 0.8}) {
    const double lo = -20.0;
    const int steps = 40000;
    const double h = (t - lo) / steps;
    double sum = 0;
    for (int i = 0; i <= steps; ++i) {
      const double s = lo + i * h;
      const double w = (i == 0 || i == steps) ? 1 : (i % 2 ? 4 : 2);
      sum += w * p(s) * (t - s) * (t - s);
    }
    CHECK(1 - p(t) == doctest::Approx(std::exp(-sum * h / 3)).epsilon(1e-5));
  }

  WindowProfileOptions starved;
  starved.max_iterations = 0;
  CHECK_THROWS_AS(solve_window_profile(starved), NumericError);
}

TEST_CASE("suite report serialization") {
  SuiteReport r;
  r.suite = "demo";
  r.checks.push_back(exact_check("a,b", 1.0, 1.0, 0.0));
  r.checks.push_back({"x", CheckKind::Exploratory, NAN, 0, 0, false});
  CHECK(r.passed());
  CHECK(r.find("a,b") != nullptr);
  const auto j = r.to_json();
  CHECK(j["schema"] == kReportSchemaVersion);
  CHECK(j["checks"][1]["value"].is_null());
  CHECK(j["checks"][1]["kind"] == "exploratory");
  std::ostringstream csv;
  r.write_csv(csv);
  CHECK(csv.str().find("demo,\"a,b\",identity") != std::string::npos);
  r.checks.push_back(exact_check("c", 1.0, 2.0, 0.5));
  CHECK(!r.passed());
}

TEST_CASE("check helpers") {
  SummaryStats s;
  s.mean = 1.0;
  s.standard_error = 0.1;
  CHECK(identity_check("i", s, 1.25).pass);
  CHECK(!identity_check("i", s, 1.35).pass);
  CHECK(upper_bound_check("b", s, 0.75).pass);
  CHECK(!upper_bound_check("b", s, 0.65).pass);
  SummaryStats t = s;
  t.mean = 1.4;
  CHECK(joint_check("j", s, t).pass);
  t.mean = 1.5;
  CHECK(!joint_check("j", s, t).pass);
}

TEST_CASE("small suites run end to end") {
  AveragingSuiteOptions a;
  a.geometry = build_complete(2);
  a.x0 = {1.0, -1.0};
  a.replicas = 5000;
  a.seed = 3;
  const auto rep = averaging_suite(a);
  CHECK(rep.find("l2_bound[t=1]") != nullptr);
  CHECK(rep.passed());

  AveragingSuiteOptions flat;
  flat.geometry = build_cycle(4);
  flat.x0 = {0.25, 0.25, 0.25, 0.25};
  flat.replicas = 50;
  const auto frep = averaging_suite(flat);
  CHECK(frep.passed());
  for (const auto& c : frep.checks) {
    if (c.name.rfind("mean_identity", 0) == 0) CHECK(c.value == doctest::Approx(0.25));
  }

  PandemicLimitOptions p;
  p.n = 3;
  p.replicas = 2000;
  p.seed = 4;
  const auto prep = pandemic_limit_suite(p);
  CHECK(prep.find("mean_random_agent_time")->target == doctest::Approx(1.5));
  CHECK(prep.find("mean_full_time")->target == doctest::Approx(2.0));
  CHECK(prep.find("half_time_gumbel") == nullptr);

  VoterSuiteOptions v;
  v.geometry = build_complete(5);
  v.replicas = 500;
  const auto vrep = voter_suite(v);
  CHECK(vrep.find("q_initial")->value == doctest::Approx(0.2));
  CHECK(vrep.series["concordance"][0][1] == 0.0);
}
