#include <algorithm>
#include <cmath>
#include <memory>

#include "fmie/experiments.hpp"
#include "fmie/models.hpp"

namespace fmie {

namespace {

struct PandemicReplica {
  double full = 0.0;         // D(n)
  double random_agent = 0.0; // average over non-source agents of T^pan (= E[D(U) | run])
  double half = 0.0;         // D(n/2)
  double curve_gap = 0.0;    // sup_t |n^-1 M(D(n/2) + t) - F(t)|
  std::vector<double> increments;  // scaled to Exponential(1)
};

}  // namespace

SuiteReport pandemic_limit_suite(const PandemicLimitOptions& o) {
  const std::size_t n = o.n;
  if (n < 2) throw InvalidArgument("pandemic suite needs n >= 2");
  const bool limit = o.limit_tests.value_or(n >= 1000);
  const Geometry g = build_complete(n);
  const auto sampler = std::make_shared<const MeetingSampler>(g);
  const double nd = static_cast<double>(n);
  const double log_n = std::log(nd);

  std::vector<double> curve_t;
  for (double t = -o.curve_halfwidth; t <= o.curve_halfwidth + 1e-12; t += o.curve_step) {
    curve_t.push_back(t);
  }

  const auto replicas = replica_map(o.replicas, [&](std::size_t r) {
    EventStream stream(sampler, replica_key(o.seed, r));
    const auto run = pandemic_times(g, 0, stream);
    const auto& d = run.count_times;
    PandemicReplica out;
    out.full = d.back();
    double sum = 0.0;
    for (std::size_t a = 1; a < n; ++a) sum += run.infection_time[a];
    out.random_agent = sum / (nd - 1.0);
    out.half = d[std::max<std::size_t>(n / 2, 1) - 1];
    if (o.increment_tests) {
      out.increments.resize(n - 1);
      for (std::size_t k = 1; k < n; ++k) {
        const double kd = static_cast<double>(k);
        out.increments[k - 1] = (d[k] - d[k - 1]) * kd * (nd - kd) / (nd - 1.0);
      }
    }
    if (limit) {
      for (double t : curve_t) {
        const auto infected = std::upper_bound(d.begin(), d.end(), out.half + t) - d.begin();
        out.curve_gap = std::max(out.curve_gap,
                                 std::abs(static_cast<double>(infected) / nd - logistic_cdf(t)));
      }
    }
    return out;
  });

  SuiteReport rep;
  rep.suite = "pandemic-limits";
  rep.params = {{"n", n}, {"replicas", o.replicas}, {"seed", o.seed}, {"alpha", o.alpha}};

  std::vector<double> full;
  std::vector<double> random_agent;
  std::vector<double> half;
  std::vector<double> gaps;
  for (const auto& r : replicas) {
    full.push_back(r.full);
    random_agent.push_back(r.random_agent);
    half.push_back(r.half - log_n);
    gaps.push_back(r.curve_gap);
  }

  double expected_full = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    expected_full += (nd - 1.0) / (static_cast<double>(k) * (nd - static_cast<double>(k)));
  }
  rep.checks.push_back(identity_check("mean_random_agent_time", summarize(random_agent),
                                      harmonic(n - 1)));
  rep.checks.push_back(identity_check("mean_full_time", summarize(full), expected_full));

  if (o.increment_tests && n >= 2) {
    std::vector<double> pooled;
    for (const auto& r : replicas) pooled.insert(pooled.end(), r.increments.begin(), r.increments.end());
    rep.checks.push_back(ks_check("increments_exponential",
                                  ks_test(Ecdf(std::move(pooled)),
                                          [](double x) { return exponential_cdf(x, 1.0); },
                                          o.alpha)));
    if (n >= 3 && o.replicas >= 3) {
      const std::size_t k = std::max<std::size_t>(n / 2, 1) - 1;
      std::vector<double> a;
      std::vector<double> b;
      for (const auto& r : replicas) {
        a.push_back(r.increments[k]);
        b.push_back(r.increments[k + 1]);
      }
      const auto rho = spearman(a, b);
      const double bound = 2.5758293035489 / std::sqrt(static_cast<double>(o.replicas) - 1.0);
      rep.checks.push_back(exact_check("increments_rank_correlation", rho.rho, 0.0, bound));
    }
  }

  if (limit) {
    rep.checks.push_back(ks_check("half_time_gumbel",
                                  ks_test(Ecdf(half), gumbel_cdf, o.alpha)));
    std::vector<double> shifted;
    for (double v : full) shifted.push_back(v - 2.0 * log_n);
    const GumbelConvolution conv;
    rep.checks.push_back(ks_check("full_time_gumbel_convolution",
                                  ks_test(Ecdf(std::move(shifted)),
                                          [&](double x) { return conv(x); }, o.alpha)));
    const auto gap = summarize(gaps);
    Check c{"aligned_curve_logistic_gap", CheckKind::Bound, gap.mean, o.curve_gap_tolerance,
            o.curve_gap_tolerance, gap.mean < o.curve_gap_tolerance};
    rep.checks.push_back(c);
  }
  return rep;
}

}  // namespace fmie
