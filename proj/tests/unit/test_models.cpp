#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "fmie/chain.hpp"
#include "fmie/error.hpp"
#include "fmie/models.hpp"
#include "fmie/stats.hpp"

using namespace fmie;

namespace {

EventStream stream_for(const Geometry& g, std::uint64_t seed, std::uint64_t r,
                       double horizon = kForever) {
  return EventStream(std::make_shared<const MeetingSampler>(g), StreamKey{seed, r}, horizon);
}

// Birth-death chain with equal up/down rates q_k; mean time to hit 0 or n.
double birth_death_hitting(std::size_t n, std::size_t k) {
  Matrix a = Matrix::Zero(n - 1, n - 1);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n - 1);
  for (std::size_t s = 1; s < n; ++s) {
    const double q = double(s) * double(n - s) / (2.0 * double(n - 1));
    a(s - 1, s - 1) = 2 * q;
    if (s > 1) a(s - 1, s - 2) = -q;
    if (s + 1 < n) a(s - 1, s) = -q;
  }
  const Eigen::VectorXd h = a.fullPivLu().solve(b);
  return h[k - 1];
}

template <class Rule>
void replay(Rule& rule, EventStream& s) {
  while (auto e = s.next()) rule.apply(*e);
}

}  // namespace

TEST_CASE("token process occupation is uniform") {
  const auto g = build_cycle(5, 0.5);
  EventStream s(g, 3);
  TokenProcess tok(5, 0);
  std::vector<double> occupation(5, 0.0);
  double last = 0;
  while (auto e = s.next()) {
    occupation[tok.holder()] += e->t - last;
    last = e->t;
    tok.apply(*e);
    if (last > 40000) break;
  }
  for (double o : occupation) CHECK(std::abs(o / last - 0.2) < 0.02);
}

TEST_CASE("horizon zero returns the initial state") {
  const auto g = build_complete(4);
  auto s = stream_for(g, 1, 0, 0.0);
  const double t0[] = {0.0};
  const auto run = run_voter(g, s, t0);
  REQUIRE(run.blocks.size() == 1);
  CHECK(run.blocks[0] == std::vector<std::uint32_t>{1, 1, 1, 1});
  auto s2 = stream_for(g, 1, 0, 0.0);
  const auto av = run_averaging(g, {1, 0, 0, 0}, s2, t0);
  CHECK(av.samples.at(0).x == std::vector<double>{1, 0, 0, 0});
}

TEST_CASE("pandemic means and increments") {
  RunningStats k2, k3;
  for (std::uint64_t r = 0; r < 4000; ++r) {
    auto s2 = stream_for(build_complete(2), 7, r);
    k2.add(pandemic_times(build_complete(2), 0, s2).infection_time[1]);
    auto s3 = stream_for(build_complete(3), 8, r);
    k3.add(pandemic_times(build_complete(3), 0, s3).count_times.back());
  }
  CHECK(std::abs(k2.mean() - 1.0) < 3 * k2.standard_error());
  CHECK(std::abs(k3.mean() - 2.0) < 3 * k3.standard_error());

  const std::size_t n = 30;
  const auto g = build_complete(n);
  std::vector<double> scaled, mid_a, mid_b;
  for (std::uint64_t r = 0; r < 2000; ++r) {
    auto s = stream_for(g, 9, r);
    const auto run = pandemic_times(g, 0, s);
    CHECK(run.infection_time[0] == 0.0);
    for (std::size_t k = 1; k < n; ++k) {
      const double inc = run.count_times[k] - run.count_times[k - 1];
      scaled.push_back(inc * double(k) * double(n - k) / double(n - 1));
    }
    mid_a.push_back(run.count_times[15] - run.count_times[14]);
    mid_b.push_back(run.count_times[16] - run.count_times[15]);
  }
  CHECK(ks_test(Ecdf(scaled), [](double x) { return exponential_cdf(x, 1.0); }, 0.01).pass);
  CHECK(std::abs(spearman(mid_a, mid_b).rho) < 2.5758 / std::sqrt(1999.0));
}

TEST_CASE("first-passage percolation") {
  RunningStats k2;
  for (std::uint64_t r = 0; r < 4000; ++r) k2.add(fpp_distances(build_complete(2), {5, r}).at(0, 1));
  CHECK(std::abs(k2.mean() - 1.0) < 3 * k2.standard_error());

  const auto g = build_complete(5);
  std::vector<double> fpp, pan;
  for (std::uint64_t r = 0; r < 3000; ++r) {
    const auto d = fpp_distances(g, {6, r});
    fpp.push_back(d.at(1, 3));
    auto s = stream_for(g, 60, r);
    pan.push_back(pandemic_times(g, 1, s).infection_time[3]);
  }
  CHECK(ks_test(Ecdf(fpp), Ecdf(pan), 0.01).pass);

  for (auto geo : {build_torus(4, 2), build_small_world(4, 2, 1.0, 0.5, 2), build_star(6)}) {
    for (std::uint64_t r = 0; r < 20; ++r) {
      const auto d = fpp_distances(geo, {7, r});
      const auto n = geo.n();
      for (AgentId i = 0; i < n; ++i) {
        REQUIRE(d.at(i, i) == 0.0);
        for (AgentId j = 0; j < n; ++j) {
          REQUIRE(d.at(i, j) == d.at(j, i));
          REQUIRE(d.max_edge_at(i, j) <= d.at(i, j));
          for (AgentId k = 0; k < n; ++k) REQUIRE(d.at(i, k) <= d.at(i, j) + d.at(j, k));
        }
      }
    }
  }
}

TEST_CASE("averaging on K2") {
  const auto g = build_complete(2);
  const double times[] = {0.25, 1.0, 3.0};
  std::vector<RunningStats> x1(3);
  RunningStats integral;
  for (std::uint64_t r = 0; r < 5000; ++r) {
    auto s = stream_for(g, 11, r);
    const auto run = run_averaging(g, {1.0, 0.0}, s, times);
    for (int k = 0; k < 3; ++k) x1[k].add(run.samples[k].x[1]);
    integral.add(run.dirichlet_integral);
    CHECK(run.entropy_monotone);
  }
  const auto gen = generator(g);
  for (int k = 0; k < 3; ++k) {
    const double target = transition_kernel(gen, times[k] / 2)(0, 1);
    CHECK(target == doctest::Approx((1 - std::exp(-times[k])) / 2));
    CHECK(std::abs(x1[k].mean() - target) < 3 * x1[k].standard_error());
  }
  CHECK(std::abs(integral.mean() - 0.5) < 3 * integral.standard_error());
}

TEST_CASE("averaging conservation and convexity per event") {
  const auto g = build_torus(3, 2);
  Averaging av(g, {3, -1, 0, 2, 0, 0, 5, -4, 1});
  const double sum0 = 6;
  const double e0 = av.dirichlet_exact();
  double lo = -4, hi = 5;
  auto s = stream_for(g, 12, 0, 50.0);
  while (auto e = s.next()) {
    av.apply(*e);
    const auto& x = av.money();
    const double sum = std::accumulate(x.begin(), x.end(), 0.0);
    REQUIRE(std::abs(sum - sum0) <= 1e-9 * std::abs(sum0));
    const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    REQUIRE(*mn >= lo - 1e-15);
    REQUIRE(*mx <= hi + 1e-15);
    lo = *mn;
    hi = *mx;
    // incremental tracking carries rounding on the scale of the initial energy
    REQUIRE(std::abs(av.dirichlet() - av.dirichlet_exact()) <= 1e-12 * e0);
  }
}

TEST_CASE("coupled pennies") {
  const auto g = build_complete(3);
  const double t = 0.8;
  const double at[] = {t};
  std::vector<double> counts(3, 0.0);
  const std::size_t reps = 10000;
  for (std::uint64_t r = 0; r < reps; ++r) {
    auto s = stream_for(g, 13, r, t);
    counts[run_coupled_pennies(0, 2, s, at)[0].z1] += 1;
  }
  const auto p = transition_kernel(generator(g), t / 2);
  const std::vector<double> probs{p(0, 0), p(0, 1), p(0, 2)};
  CHECK(chi_squared_gof(counts, probs).p_value > 0.01);

  // Equal aux draws move both pennies together.
  CoupledPennies cp(1, 1);
  auto s = stream_for(g, 14, 0, 30.0);
  while (auto e = s.next()) {
    MeetingEvent ev = *e;
    ev.aux2 = ev.aux1;
    cp.apply(ev);
    REQUIRE(cp.first() == cp.second());
  }
  auto unbounded = stream_for(g, 14, 0);
  CHECK_THROWS_AS(run_coupled_pennies(0, 0, unbounded, at), InvalidArgument);
}

TEST_CASE("voter and coalescing exact means") {
  RunningStats voter2, coal2, coal3;
  for (std::uint64_t r = 0; r < 4000; ++r) {
    auto a = stream_for(build_complete(2), 15, r);
    voter2.add(run_voter(build_complete(2), a, {}).consensus_time);
    auto b = stream_for(build_complete(2), 16, r);
    coal2.add(run_coalescing(build_complete(2), b, {}).coalescence_time);
    auto c = stream_for(build_complete(3), 17, r);
    coal3.add(run_coalescing(build_complete(3), c, {}).coalescence_time);
  }
  CHECK(std::abs(voter2.mean() - 1.0) < 3 * voter2.standard_error());
  CHECK(std::abs(coal2.mean() - 1.0) < 3 * coal2.standard_error());
  CHECK(std::abs(coal3.mean() - 8.0 / 3) < 3 * coal3.standard_error());
}

TEST_CASE("two-opinion voter is the birth-death chain") {
  const std::size_t n = 6;
  const auto g = build_complete(n);
  std::vector<double> hold(n + 1, 0.0), up(n + 1, 0.0), down(n + 1, 0.0);
  RunningStats hit;
  for (std::uint64_t r = 0; r < 4000; ++r) {
    auto s = stream_for(g, 18, r);
    const auto run = run_voter_two(g, 3, s);
    hit.add(run.hit_time);
    double t = 0;
    std::uint32_t x = 3;
    for (const auto& [time, count] : run.count_path) {
      if (count == x) continue;
      hold[x] += time - t;
      (count > x ? up : down)[x] += 1;
      t = time;
      x = count;
    }
    CHECK((x == 0 || x == n));
    CHECK(run.final_count == x);
  }
  for (std::size_t k = 1; k < n; ++k) {
    const double rate = double(k) * double(n - k) / (2.0 * double(n - 1));
    CHECK(std::abs(up[k] / hold[k] - rate) < 4 * std::sqrt(up[k]) / hold[k]);
    CHECK(std::abs(down[k] / hold[k] - rate) < 4 * std::sqrt(down[k]) / hold[k]);
  }
  CHECK(std::abs(hit.mean() - birth_death_hitting(n, 3)) < 3 * hit.standard_error());
  auto s = stream_for(g, 18, 0);
  CHECK_THROWS_AS(run_voter_two(g, 0, s), InvalidArgument);
}

TEST_CASE("coalescing cluster count jump rates") {
  const std::size_t n = 8;
  const auto g = build_complete(n);
  std::vector<double> hold(n + 1, 0.0), jumps(n + 1, 0.0);
  for (std::uint64_t r = 0; r < 3000; ++r) {
    auto s = stream_for(g, 19, r);
    const auto run = run_coalescing(g, s, {});
    double t = 0;
    std::size_t k = n;
    for (const auto& [time, count] : run.count_path) {
      REQUIRE(count == k - 1);
      hold[k] += time - t;
      jumps[k] += 1;
      t = time;
      k = count;
    }
    CHECK(k == 1);
  }
  for (std::size_t k = 2; k <= n; ++k) {
    const double rate = double(k) * double(k - 1) / 2.0 / double(n - 1);
    CHECK(std::abs(jumps[k] / hold[k] - rate) < 4 * std::sqrt(jumps[k]) / hold[k]);
  }
}

TEST_CASE("voter-coalescing duality report") {
  const auto g = build_complete(4);
  const auto zero = voter_coalescing_duality_test(g, 0.0, 200, 3);
  CHECK(zero.chi_squared == 0.0);
  CHECK(zero.p_value == 1.0);
  const double surv[] = {1.0, 2.0, 4.0};
  const auto rep = voter_coalescing_duality_test(g, 1.0, 10000, 21, surv);
  CHECK(rep.p_value > 0.01);
  CHECK(rep.survival_agree);
  CHECK_THROWS_AS(voter_coalescing_duality_test(build_complete(11), 1.0, 10, 1), UnsupportedSize);
}

TEST_CASE("Q statistic and partition entropy") {
  const std::uint32_t singletons[] = {1, 1, 1, 1};
  CHECK(q_statistic(singletons, 4) == doctest::Approx(0.25));
  CHECK(partition_entropy(singletons, 4) == doctest::Approx(std::log(4.0)));
  const std::uint32_t one[] = {4};
  CHECK(q_statistic(one, 4) == 1.0);
  CHECK(partition_entropy(one, 4) == 0.0);

  // E Q(t) = P(T^meet <= t) on K5 from both sides.
  const auto g = build_complete(5);
  const double at[] = {2.0};
  RunningStats q, met;
  auto sampler = std::make_shared<const MeetingSampler>(g);
  for (std::uint64_t r = 0; r < 6000; ++r) {
    auto s = stream_for(g, 22, r);
    q.add(q_statistic(run_voter(g, s, at).blocks[0], 5));
    Rng pick(StreamKey{23, r}, 1);
    const auto a = AgentId(pick.below(5)), b = AgentId(pick.below(5));
    EventStream s1(sampler, {24, 2 * r}), s2(sampler, {24, 2 * r + 1});
    met.add(sample_meeting_time(a, b, s1, s2) <= 2.0 ? 1.0 : 0.0);
  }
  CHECK(std::abs(q.mean() - met.mean()) <
        3 * std::hypot(q.standard_error(), met.standard_error()));
}

TEST_CASE("meeting time sampler matches the linear system") {
  const auto g = build_cycle(5, 1.0);
  const auto exact = meeting_times(generator(g), Speed::Half);
  auto sampler = std::make_shared<const MeetingSampler>(g);
  RunningStats m;
  for (std::uint64_t r = 0; r < 4000; ++r) {
    EventStream s1(sampler, {25, 2 * r}), s2(sampler, {25, 2 * r + 1});
    m.add(sample_meeting_time(0, 2, s1, s2));
  }
  CHECK(std::abs(m.mean() - exact(0, 2)) < 3 * m.standard_error());
}

TEST_CASE("compulsive gambler") {
  const auto k6 = build_complete(6);
  for (std::uint64_t r = 0; r < 300; ++r) {
    auto s = stream_for(k6, 26, r);
    const std::vector<double> x0{1, 2, 3, 0.5, 0.25, 4};
    const auto run = run_gambler(k6, x0, s);
    REQUIRE(run.absorbed);
    const auto rich = std::count_if(run.money.begin(), run.money.end(), [](double v) { return v > 0; });
    CHECK(rich == 1);
    CHECK(std::accumulate(run.money.begin(), run.money.end(), 0.0) == 10.75);
  }
  const auto p5 = build_path(5);
  for (std::uint64_t r = 0; r < 300; ++r) {
    auto s = stream_for(p5, 27, r);
    const auto run = run_gambler(p5, std::vector<double>(5, 1.0), s);
    CHECK(is_independent_support(p5, run.money));
    CHECK(std::accumulate(run.money.begin(), run.money.end(), 0.0) == 5.0);
  }
  double wins = 0;
  const int reps = 10000;
  for (int r = 0; r < reps; ++r) {
    auto s = stream_for(build_complete(2), 28, r);
    wins += run_gambler(build_complete(2), {1.0, 1.0}, s).money[0] > 0 ? 1 : 0;
  }
  CHECK(std::abs(wins / reps - 0.5) < 4 * 0.5 / std::sqrt(double(reps)));
  auto s = stream_for(k6, 1, 0);
  CHECK_THROWS_AS(run_gambler(k6, {1, -1, 0, 0, 0, 0}, s), InvalidArgument);
}

TEST_CASE("interchange") {
  const auto k3 = interchange_gap_bruteforce(build_complete(3));
  CHECK(k3.lambda_ip == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(std::abs(k3.lambda_ip - k3.lambda_mc) < 1e-8);
  for (auto g : {build_star(5), build_path(5, 0.7), build_cycle(6)}) {
    const auto gaps = interchange_gap_bruteforce(g);
    CHECK(gaps.lambda_ip <= gaps.lambda_mc + 1e-10);
  }
  CHECK_THROWS_AS(interchange_gap_bruteforce(build_complete(7)), UnsupportedSize);

  const auto g = build_path(4);
  Interchange ic(4);
  auto s = stream_for(g, 29, 0, 100.0);
  int parity = 0;
  while (auto e = s.next()) {
    ic.apply(*e);
    parity ^= 1;
    auto sorted = ic.token_at();
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == std::vector<std::uint32_t>{0, 1, 2, 3});
    REQUIRE(ic.parity() == parity);
  }

  // Token 0's position is the associated chain.
  const double at[] = {1.5};
  std::vector<double> counts(4, 0.0);
  for (std::uint64_t r = 0; r < 8000; ++r) {
    auto st = stream_for(g, 30, r, 1.5);
    const auto perm = run_interchange(g, st, at)[0].token_at;
    counts[std::find(perm.begin(), perm.end(), 0u) - perm.begin()] += 1;
  }
  const auto p = transition_kernel(generator(g), 1.5);
  CHECK(chi_squared_gof(counts, std::vector<double>{p(0, 0), p(0, 1), p(0, 2), p(0, 3)}).p_value >
        0.01);
}

TEST_CASE("deference") {
  const auto g = build_complete(40);
  for (std::uint64_t r = 0; r < 20; ++r) {
    auto a = stream_for(g, 31, r), b = stream_for(g, 31, r);
    const auto def = run_deference(g, a, {}, 1);
    const auto pan = pandemic_times(g, 0, b);
    CHECK(def.label1_times == pan.infection_time);
  }
  Deference d(12);
  auto s = stream_for(build_cycle(12), 32, 0, 60.0);
  auto prev = d.labels();
  while (auto e = s.next()) {
    d.apply(*e);
    for (std::size_t a = 0; a < 12; ++a) REQUIRE(d.labels()[a] <= prev[a]);
    REQUIRE(d.counts()[0] >= 1);
    prev = d.labels();
  }
}

TEST_CASE("fashionista") {
  Fashionista f(std::vector<std::uint64_t>{0, 1, 1, 2, 2, 2});
  // c = {1, 2, 3}: sum c(c-1) = 0 + 2 + 6 = 8 over 30 ordered pairs
  CHECK(f.diversity() == doctest::Approx(8.0 / 30));
  CHECK(f.live_fashions() == 3);

  // Without originations everyone ends on the most recent fashion.
  const auto g = build_complete(8);
  Fashionista quiet(8);
  quiet.originate(3, 0.0);
  auto s = stream_for(g, 33, 0, 200.0);
  replay(quiet, s);
  CHECK(quiet.live_fashions() == 1);
  CHECK(quiet.diversity() == 1.0);
  for (AgentId a = 0; a < 8; ++a) CHECK(quiet.stamp_of(a) == 0.0);

  // Stamps never decrease along a driven run.
  const double times[] = {5.0, 10.0, 15.0};
  auto st = stream_for(g, 34, 0, 15.0);
  const auto run = run_fashionista(g, 2.0, st, times);
  CHECK(run.diversity.size() == 3);
  CHECK(run.originations > 0);
  for (double s2 : run.diversity) CHECK((s2 >= 0.0 && s2 <= 1.0));
}

TEST_CASE("rules are pure functions of the stream") {
  const auto g = build_torus(3, 2);
  const std::vector<std::string> rules = rule_names();
  for (const auto& name : rules) {
    RuleParams p;
    p.k = 3;
    p.lambda = 1.5;
    const double times[] = {0.5, 1.0, 4.0};
    auto a = stream_for(g, 35, 1, 4.0), b = stream_for(g, 35, 1, 4.0);
    std::ostringstream oa, ob;
    trajectory(name, p, g, a, times, oa);
    trajectory(name, p, g, b, times, ob);
    CHECK_MESSAGE(oa.str() == ob.str(), name);
    CHECK(!oa.str().empty());
  }
  auto s = stream_for(g, 1, 0, 1.0);
  std::ostringstream out;
  CHECK_THROWS_AS(trajectory("nope", {}, g, s, {}, out), InvalidArgument);
}

TEST_CASE("absorption taxonomy") {
  CHECK(long_run_behavior("gambler") == LongRunBehavior::DisorderedAbsorbing);
  CHECK(long_run_behavior("fashionista") == LongRunBehavior::Stationary);
  CHECK(long_run_behavior("voter") == LongRunBehavior::OrderedAbsorbing);
  CHECK(long_run_behavior("pandemic") == LongRunBehavior::OrderedAbsorbing);
  CHECK(long_run_behavior("interchange") == LongRunBehavior::Stationary);
  CHECK(to_string(LongRunBehavior::DisorderedAbsorbing) == "disordered-absorbing");
}
