#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "fmie/chain.hpp"
#include "fmie/experiments.hpp"
#include "fmie/models.hpp"

namespace fmie {

namespace {

std::string label(const char* base, double t) {
  std::ostringstream s;
  s << base << "[t=" << t << "]";
  return s.str();
}

struct VoterReplica {
  double voter_time = 0.0;
  double coal_time = 0.0;
  double meet_time = 0.0;
  std::vector<double> q;
  std::vector<double> entropy;
  std::vector<double> concordance;
};

/// Common pair rate if g is a complete graph with equal rates.
std::optional<double> complete_rate(const Geometry& g) {
  const std::size_t n = g.n();
  if (g.edges().size() != n * (n - 1) / 2) return std::nullopt;
  const double r = g.edges().front().rate;
  for (const auto& e : g.edges()) {
    if (std::abs(e.rate - r) > 1e-12 * r) return std::nullopt;
  }
  return r;
}

}  // namespace

SuiteReport voter_suite(const VoterSuiteOptions& o) {
  const Geometry& g = o.geometry;
  const std::size_t n = g.n();
  const std::size_t m = o.replicas;
  std::vector<double> times = o.times;
  std::sort(times.begin(), times.end());
  const auto sampler = std::make_shared<const MeetingSampler>(g);

  const auto replicas = replica_map(m, [&](std::size_t r) {
    VoterReplica out;
    EventStream vs(sampler, replica_key(o.seed, r));
    const auto v = run_voter(g, vs, times);
    out.voter_time = v.consensus_time;
    for (std::size_t s = 0; s < times.size(); ++s) {
      out.q.push_back(q_statistic(v.blocks[s], n));
      out.entropy.push_back(partition_entropy(v.blocks[s], n));
      out.concordance.push_back(v.concordance[s]);
    }
    EventStream cs(sampler, replica_key(o.seed, m + r));
    out.coal_time = run_coalescing(g, cs, {}).coalescence_time;
    // Two independent half-speed chains from independent uniform starts.
    Rng starts(replica_key(o.seed, 2 * m + 2 * r), kOriginationSubstream);
    const auto a = static_cast<AgentId>(starts.below(n));
    const auto b = static_cast<AgentId>(starts.below(n));
    EventStream s1(sampler, replica_key(o.seed, 2 * m + 2 * r));
    EventStream s2(sampler, replica_key(o.seed, 2 * m + 2 * r + 1));
    out.meet_time = sample_meeting_time(a, b, s1, s2);
    return out;
  });

  SuiteReport rep;
  rep.suite = "voter";
  rep.params = {{"geometry", g.label()}, {"n", n}, {"replicas", m}, {"seed", o.seed},
                {"times", times}};

  auto column = [&](auto pick) {
    std::vector<double> v;
    for (const auto& r : replicas) v.push_back(pick(r));
    return v;
  };
  const auto voter = summarize(column([](const VoterReplica& r) { return r.voter_time; }));
  const auto coal = summarize(column([](const VoterReplica& r) { return r.coal_time; }));
  rep.params["mean_voter_time"] = voter.mean;
  rep.params["mean_coalescence_time"] = coal.mean;

  if (const auto c = complete_rate(g)) {
    const double target = kingman_mean(n) / *c;
    rep.params["kingman_target"] = target;
    rep.checks.push_back(identity_check("voter_mean_kingman", voter, target));
    rep.checks.push_back(identity_check("coalescing_mean_kingman", coal, target));
  } else {
    rep.checks.push_back(joint_check("voter_coalescing_mean_duality", voter, coal));
  }

  if (o.bottleneck_bound && n <= kMaxBottleneckAgents) {
    const double k = kappa(g);
    rep.params["kappa"] = k;
    rep.checks.push_back(upper_bound_check("bottleneck_bound", voter,
                                           4.0 * std::log(2.0) * static_cast<double>(n) / k));
  }

  auto& q_series = rep.series["q"] = nlohmann::json::array();
  auto& meet_series = rep.series["meeting_cdf"] = nlohmann::json::array();
  auto& ent_series = rep.series["partition_entropy"] = nlohmann::json::array();
  auto& conc_series = rep.series["concordance"] = nlohmann::json::array();
  for (std::size_t s = 0; s < times.size(); ++s) {
    const double t = times[s];
    const auto q = summarize(column([&](const VoterReplica& r) { return r.q[s]; }));
    const auto met =
        summarize(column([&](const VoterReplica& r) { return r.meet_time <= t ? 1.0 : 0.0; }));
    rep.checks.push_back(joint_check(label("q_duality", t), q, met));
    if (t == 0.0) {
      rep.checks.push_back(exact_check("q_initial", q.mean, 1.0 / static_cast<double>(n), 1e-12));
    }
    q_series.push_back({t, q.mean});
    meet_series.push_back({t, met.mean});
    ent_series.push_back(
        {t, summarize(column([&](const VoterReplica& r) { return r.entropy[s]; })).mean});
    conc_series.push_back(
        {t, summarize(column([&](const VoterReplica& r) { return r.concordance[s]; })).mean});
  }

  if (n <= kMaxMeetingAgents && n > 1) {
    const Matrix meet = meeting_times(generator(g), Speed::Half);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < meet.rows(); ++i) {
      for (Eigen::Index j = 0; j < meet.cols(); ++j) {
        if (i != j) sum += meet(i, j);
      }
    }
    const double tau = sum / static_cast<double>(n * (n - 1));
    const double ratio = coal.mean / tau;
    rep.params["tau_meet"] = tau;
    rep.checks.push_back(Check{"coalescent_ratio", CheckKind::Exploratory, ratio, 2.0, 0.5,
                               std::abs(ratio - 2.0) <= 0.5});
  }

  if (o.duality_time) {
    const auto d = voter_coalescing_duality_test(g, *o.duality_time, m, o.seed ^ 0xd0a1u,
                                                 o.survival_times);
    rep.checks.push_back(Check{label("partition_duality_chi2_p", d.t), CheckKind::Ks, d.p_value,
                               0.01, 0.01, d.p_value > 0.01});
    for (std::size_t k = 0; k < d.survival_times.size(); ++k) {
      const double diff = d.voter_survival[k] - d.coalescing_survival[k];
      const double tol = 3.0 * d.survival_se[k];
      rep.checks.push_back(Check{label("survival_duality", d.survival_times[k]),
                                 CheckKind::Identity, diff, 0.0, tol, std::abs(diff) <= tol});
    }
  }
  return rep;
}

}  // namespace fmie
