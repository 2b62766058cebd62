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

std::string label(const char* base, double t, std::size_t i, std::size_t j) {
  std::ostringstream s;
  s << base << "[t=" << t << ",i=" << i << ",j=" << j << "]";
  return s.str();
}

struct AveragingReplica {
  std::vector<std::vector<double>> x;  // per sample time
  std::vector<double> norm;            // centered ||X(t) - mean||_2
  std::vector<double> entropy_gap;     // log n - Ent(X(t))
  double dirichlet_integral = 0.0;
  std::uint64_t entropy_violations = 0;
  bool entropy_monotone = true;
};

}  // namespace

SuiteReport averaging_suite(const AveragingSuiteOptions& o) {
  const Geometry& g = o.geometry;
  const std::size_t n = g.n();
  std::vector<double> x0 = o.x0;
  std::optional<AgentId> point_mass;
  if (x0.empty()) {
    x0.assign(n, 0.0);
    x0[0] = 1.0;
  }
  if (x0.size() != n) throw InvalidArgument("averaging suite: x0 length != n");
  for (std::size_t a = 0; a < n; ++a) {
    if (x0[a] == 1.0 && std::count(x0.begin(), x0.end(), 0.0) + 1 == static_cast<long>(n)) {
      point_mass = static_cast<AgentId>(a);
    }
  }
  const bool probability = is_probability(x0);
  const double mean0 = average(x0);

  std::vector<double> times = o.times;
  if (o.duality_time) times.push_back(*o.duality_time);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  const auto sampler = std::make_shared<const MeetingSampler>(g);
  const auto replicas = replica_map(o.replicas, [&](std::size_t r) {
    EventStream stream(sampler, replica_key(o.seed, r));
    AveragingOptions opts;
    opts.integrate_dirichlet = o.dirichlet_integral;
    const auto run = run_averaging(g, x0, stream, times, opts);
    AveragingReplica out;
    for (const auto& s : run.samples) {
      std::vector<double> centered = s.x;
      for (double& v : centered) v -= mean0;
      out.norm.push_back(l2_norm(centered));
      if (s.entropy) out.entropy_gap.push_back(std::log(static_cast<double>(n)) - *s.entropy);
      out.x.push_back(s.x);
    }
    out.dirichlet_integral = run.dirichlet_integral;
    out.entropy_violations = run.entropy_violations;
    out.entropy_monotone = run.entropy_monotone;
    return out;
  });

  SuiteReport rep;
  rep.suite = "averaging";
  rep.params = {{"geometry", g.label()},
                {"n", n},
                {"replicas", o.replicas},
                {"seed", o.seed},
                {"x0", x0},
                {"times", times}};

  const Generator gen = generator(g);
  const Spectrum spectrum(gen);
  const double lambda = n > 1 ? spectrum.gap() : 0.0;
  auto column = [&](auto pick) {
    std::vector<double> v;
    v.reserve(replicas.size());
    for (const auto& r : replicas) v.push_back(pick(r));
    return v;
  };

  std::optional<double> alpha;
  for (std::size_t s = 0; s < times.size(); ++s) {
    const double t = times[s];
    const bool requested = std::find(o.times.begin(), o.times.end(), t) != o.times.end();
    if (!requested) continue;
    if (o.mean_identity) {
      const Matrix p = spectrum.kernel(t / 2.0);
      for (std::size_t j = 0; j < n; ++j) {
        double expected = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          expected += x0[i] * p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        const auto col = column([&](const AveragingReplica& r) { return r.x[s][j]; });
        std::ostringstream name;
        name << "mean_identity[t=" << t << ",j=" << j << "]";
        rep.checks.push_back(identity_check(name.str(), summarize(col), expected));
      }
    }
    if (o.l2_bound) {
      const auto col = column([&](const AveragingReplica& r) { return r.norm[s]; });
      std::vector<double> centered = x0;
      for (double& v : centered) v -= mean0;
      rep.checks.push_back(upper_bound_check(label("l2_bound", t), summarize(col),
                                             l2_norm(centered) * std::exp(-lambda * t / 4.0)));
    }
    if (o.entropy && probability && n <= kMaxLogSobolevAgents && n > 1) {
      if (!alpha) alpha = log_sobolev(gen);
      const auto col = column([&](const AveragingReplica& r) { return r.entropy_gap[s]; });
      const double gap0 = std::log(static_cast<double>(n)) - entropy(x0);
      rep.checks.push_back(upper_bound_check(label("entropy_decay", t), summarize(col),
                                             gap0 * std::exp(-*alpha * t / 2.0)));
    }
  }

  if (o.dirichlet_integral) {
    const auto col = column([](const AveragingReplica& r) { return r.dirichlet_integral; });
    const auto stats = summarize(col);
    const double target = 2.0 * variance(x0);
    rep.checks.push_back(identity_check("dirichlet_integral", stats, target));
    if (target > 0.0) {
      const double rel = std::abs(stats.mean - target) / target;
      rep.checks.push_back(Check{"dirichlet_integral_relative_error", CheckKind::Bound, rel, 0.02,
                                 0.02, rel < 0.02});
    }
  }

  if (o.entropy && probability) {
    std::uint64_t violations = 0;
    std::uint64_t bad_paths = 0;
    for (const auto& r : replicas) {
      violations += r.entropy_violations;
      bad_paths += r.entropy_monotone ? 0 : 1;
    }
    rep.checks.push_back(exact_check("entropy_monotone_violations",
                                     static_cast<double>(bad_paths), 0.0, 0.0));
    rep.params["entropy_event_violations"] = violations;
  }

  if (o.duality_time) {
    if (!point_mass) throw InvalidArgument("averaging duality check needs a point-mass x0");
    const double t = *o.duality_time;
    const auto s = static_cast<std::size_t>(
        std::find(times.begin(), times.end(), t) - times.begin());
    const double sample_t[] = {t};
    const auto pennies = replica_map(o.replicas, [&](std::size_t r) {
      EventStream stream(sampler, replica_key(o.seed, o.replicas + r), t);
      return run_coupled_pennies(*point_mass, *point_mass, stream, sample_t).at(0);
    });
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const auto prod =
            column([&](const AveragingReplica& r) { return r.x[s][i] * r.x[s][j]; });
        std::vector<double> hit;
        for (const auto& p : pennies) hit.push_back(p.z1 == i && p.z2 == j ? 1.0 : 0.0);
        rep.checks.push_back(
            joint_check(label("pennies_duality", t, i, j), summarize(prod), summarize(hit)));
      }
    }
  }
  return rep;
}

}  // namespace fmie
