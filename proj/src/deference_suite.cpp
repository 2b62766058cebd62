#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "fmie/experiments.hpp"
#include "fmie/models.hpp"

namespace fmie {

namespace {

/// Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k] / n;
    my += y[k] / n;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxy / sxx;
}

struct FashionSummary {
  double mean = 0.0;  // diversity averaged over both windows and replicas
  Check stationarity;
};

FashionSummary fashion_run(const Geometry& g, double lambda, std::size_t replicas,
                           std::uint64_t seed, std::uint64_t key_offset, double burn_in,
                           double window, double step, const std::string& name) {
  std::vector<double> times;
  const auto per_window = static_cast<std::size_t>(std::floor(window / step));
  for (std::size_t k = 0; k < 2 * per_window; ++k) {
    times.push_back(burn_in + step * static_cast<double>(k));
  }
  const auto sampler = std::make_shared<const MeetingSampler>(g);
  const auto windows = replica_map(replicas, [&](std::size_t r) {
    EventStream stream(sampler, replica_key(seed, key_offset + r));
    const auto run = run_fashionista(g, lambda, stream, times);
    double a = 0.0;
    double b = 0.0;
    for (std::size_t k = 0; k < per_window; ++k) {
      a += run.diversity[k];
      b += run.diversity[per_window + k];
    }
    return std::pair<double, double>(a / static_cast<double>(per_window),
                                     b / static_cast<double>(per_window));
  });
  std::vector<double> diff;
  std::vector<double> both;
  for (const auto& [a, b] : windows) {
    diff.push_back(a - b);
    both.push_back(0.5 * (a + b));
  }
  FashionSummary out;
  out.mean = summarize(both).mean;
  out.stationarity = identity_check(name, summarize(diff), 0.0);
  return out;
}

}  // namespace

SuiteReport deference_fashionista_suite(const DeferenceFashionistaOptions& o) {
  SuiteReport rep;
  rep.suite = "deference-fashionista";
  rep.params = {{"n", o.n}, {"ks", o.ks}, {"replicas", o.replicas}, {"seed", o.seed},
                {"fashion_n", o.fashion_n}, {"lambdas", o.lambdas},
                {"fashion_replicas", o.fashion_replicas}, {"burn_in", o.burn_in},
                {"window", o.window}};

  if (o.deference) {
    const std::size_t n = o.n;
    if (n < 2) throw InvalidArgument("deference needs n >= 2");
    const Geometry g = build_complete(n);
    const auto sampler = std::make_shared<const MeetingSampler>(g);
    const std::size_t top = *std::max_element(o.ks.begin(), o.ks.end());
    const double nd = static_cast<double>(n);
    const double at[] = {std::log(nd)};
    const auto shares = replica_map(o.replicas, [&](std::size_t r) {
      EventStream stream(sampler, replica_key(o.seed, r));
      return run_deference(g, stream, at, top).shares.at(0);
    });
    const double lo = 0.5 / nd;
    for (std::size_t k : o.ks) {
      std::vector<double> stat;
      for (const auto& s : shares) {
        double cum = 0.0;
        for (std::size_t l = 0; l < k; ++l) cum += s[l];
        stat.push_back(logistic_inverse(std::clamp(cum, lo, 1.0 - lo)));
      }
      const double kd = static_cast<double>(k);
      std::ostringstream name;
      name << "deference_logit_share[k=" << k << "]";
      rep.checks.push_back(ks_check(
          name.str(),
          ks_test(Ecdf(std::move(stat)), [&](double x) { return log_gamma_cdf(x, kd); }, o.alpha)));
    }
    // Label 0 spreads exactly as a pandemic from agent 0 on the same stream.
    const std::size_t coupled = std::min<std::size_t>(o.replicas, 20);
    std::size_t mismatches = 0;
    for (std::size_t r = 0; r < coupled; ++r) {
      EventStream a(sampler, replica_key(o.seed, r));
      EventStream b(sampler, replica_key(o.seed, r));
      const auto d = run_deference(g, a, {}, 1);
      const auto p = pandemic_times(g, 0, b);
      if (d.label1_times != p.infection_time) ++mismatches;
    }
    rep.checks.push_back(
        exact_check("deference_pandemic_coupling", static_cast<double>(mismatches), 0.0, 0.0));
  }

  if (o.fashionista && !o.lambdas.empty()) {
    const Geometry g = build_complete(o.fashion_n);
    std::vector<double> log_lambda;
    std::vector<double> log_s;
    auto& series = rep.series["fashionista_diversity"] = nlohmann::json::array();
    for (std::size_t k = 0; k < o.lambdas.size(); ++k) {
      const double lambda = o.lambdas[k];
      std::ostringstream name;
      name << "fashionista_stationarity[lambda=" << lambda << "]";
      const auto f = fashion_run(g, lambda, o.fashion_replicas, o.seed ^ 0xfa5u,
                                 k * o.fashion_replicas, o.burn_in, o.window, o.sample_step,
                                 name.str());
      rep.checks.push_back(f.stationarity);
      series.push_back({lambda, f.mean});
      log_lambda.push_back(std::log(lambda));
      log_s.push_back(std::log(f.mean));
    }
    if (o.lambdas.size() >= 2) {
      const double slope = ols_slope(log_lambda, log_s);
      rep.checks.push_back(exact_check("fashionista_lambda_slope", slope, o.slope_target,
                                       o.slope_tolerance));
    }
  }

  if (o.torus_scan && o.torus_sides.size() >= 2) {
    std::vector<double> log_m;
    std::vector<double> log_s;
    auto& series = rep.series["torus_diversity"] = nlohmann::json::array();
    for (std::size_t k = 0; k < o.torus_sides.size(); ++k) {
      const std::size_t m = o.torus_sides[k];
      const Geometry g = build_torus(m, 2);
      std::ostringstream name;
      name << "torus_stationarity[m=" << m << "]";
      auto f = fashion_run(g, o.torus_lambda, o.torus_replicas, o.seed ^ 0x7042u,
                           k * o.torus_replicas, o.burn_in, o.window, o.sample_step, name.str());
      f.stationarity.kind = CheckKind::Exploratory;
      rep.checks.push_back(f.stationarity);
      series.push_back({static_cast<double>(m), f.mean});
      log_m.push_back(std::log(static_cast<double>(m)));
      log_s.push_back(std::log(f.mean));
    }
    const double slope = ols_slope(log_m, log_s);
    Check c = exact_check("torus_side_slope", slope, -2.0 / 3.0, 0.2);
    c.kind = CheckKind::Exploratory;
    rep.checks.push_back(c);
  }
  return rep;
}

}  // namespace fmie
