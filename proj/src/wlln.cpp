#include <algorithm>
#include <cmath>

#include "fmie/experiments.hpp"
#include "fmie/models.hpp"

namespace fmie {

WllnResult wlln_concentration(const Geometry& g, double epsilon, std::size_t replicas,
                              std::uint64_t seed) {
  const std::size_t n = g.n();
  if (n > kMaxWllnAgents) throw UnsupportedSize("wlln_concentration supports n <= 400");
  if (n < 2) throw InvalidArgument("wlln_concentration needs n >= 2");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (replicas < 1) throw InvalidArgument("wlln_concentration needs replicas >= 1");
  const std::size_t pairs = n * (n - 1) / 2;

  struct Sample {
    std::vector<float> time;  // distinct pairs a < b, row-major
    double ratio = 0.0;       // mean over pairs of max edge / T
  };
  const auto samples = replica_map(replicas, [&](std::size_t r) {
    const auto d = fpp_distances(g, replica_key(seed, r));
    Sample s;
    s.time.reserve(pairs);
    for (AgentId a = 0; a < n; ++a) {
      for (AgentId b = a + 1; b < n; ++b) {
        s.time.push_back(static_cast<float>(d.at(a, b)));
        s.ratio += d.max_edge_at(a, b) / d.at(a, b);
      }
    }
    s.ratio /= static_cast<double>(pairs);
    return s;
  });

  WllnResult out;
  out.pairs = pairs;
  std::vector<float> pooled;
  pooled.reserve(pairs * replicas);
  for (const auto& s : samples) pooled.insert(pooled.end(), s.time.begin(), s.time.end());
  auto mid = pooled.begin() + static_cast<std::ptrdiff_t>(pooled.size() / 2);
  std::nth_element(pooled.begin(), mid, pooled.end());
  out.median_time = *mid;

  const double lo = (1.0 - epsilon) * out.median_time;
  const double hi = (1.0 + epsilon) * out.median_time;
  std::size_t failing = 0;
  double outside_sum = 0.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    std::size_t outside = 0;
    for (const auto& s : samples) {
      const double t = s.time[p];
      outside += (t <= lo || t >= hi) ? 1 : 0;
    }
    const double frac = static_cast<double>(outside) / static_cast<double>(replicas);
    outside_sum += frac;
    failing += frac > epsilon ? 1 : 0;
  }
  out.failing_fraction = static_cast<double>(failing) / static_cast<double>(pairs);
  out.mean_outside = outside_sum / static_cast<double>(pairs);
  for (const auto& s : samples) out.mean_max_edge_ratio += s.ratio / static_cast<double>(replicas);
  return out;
}

SuiteReport wlln_suite(const Geometry& g, double epsilon, std::size_t replicas,
                       std::uint64_t seed, std::optional<double> max_failing_fraction,
                       std::optional<double> min_failing_fraction) {
  const auto r = wlln_concentration(g, epsilon, replicas, seed);
  SuiteReport rep;
  rep.suite = "wlln";
  rep.params = {{"geometry", g.label()}, {"n", g.n()},          {"epsilon", epsilon},
                {"replicas", replicas},  {"seed", seed},        {"median_time", r.median_time},
                {"mean_outside", r.mean_outside},
                {"mean_max_edge_ratio", r.mean_max_edge_ratio}};
  if (max_failing_fraction) {
    rep.checks.push_back(Check{"failing_fraction_below", CheckKind::Exploratory,
                               r.failing_fraction, *max_failing_fraction, 0.0,
                               r.failing_fraction < *max_failing_fraction});
  }
  if (min_failing_fraction) {
    rep.checks.push_back(Check{"failing_fraction_above", CheckKind::Exploratory,
                               r.failing_fraction, *min_failing_fraction, 0.0,
                               r.failing_fraction > *min_failing_fraction});
  }
  if (!max_failing_fraction && !min_failing_fraction) {
    rep.checks.push_back(Check{"failing_fraction", CheckKind::Exploratory, r.failing_fraction,
                               0.0, 0.0, true});
  }
  return rep;
}

}  // namespace fmie
