#include "fmie/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "fashionista_drive.hpp"
#include "fmie/error.hpp"
#include "fmie/stats.hpp"

namespace fmie {

namespace {

void check_agent(AgentId a, std::size_t n, const char* what) {
  if (a >= n) throw InvalidArgument(std::string(what) + ": agent out of range");
}

void check_sample_times(std::span<const double> times) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0)) throw InvalidArgument("sample times must be >= 0");
    if (k > 0 && times[k] < times[k - 1]) throw InvalidArgument("sample times must be ascending");
  }
}

std::vector<std::uint32_t> nonzero_descending(std::span<const std::uint32_t> counts) {
  std::vector<std::uint32_t> out;
  for (auto c : counts) {
    if (c > 0) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace

// ---- Pandemic and FPP ---------------------------------------------------------------

PandemicRun pandemic_times(const Geometry& g, AgentId source, EventStream& stream) {
  check_agent(source, g.n(), "pandemic");
  Pandemic rule(g.n(), source);
  run(rule, stream);
  return PandemicRun{rule.infection_times(), rule.count_times()};
}

FppDistances fpp_distances(const Geometry& g, StreamKey key) {
  const std::size_t n = g.n();
  Rng rng(key, kEdgeLengthSubstream);
  std::vector<double> length(g.edges().size());
  for (std::size_t e = 0; e < length.size(); ++e) length[e] = rng.exponential(g.edges()[e].rate);

  // Snap lengths to a power-of-two grid q with 2 * sum(lengths) <= 2^53 q, so
  // every simple-path sum (and the sum of two of them) is an exact multiple
  // of q. Distances then obey the triangle inequality exactly.
  const double total = std::accumulate(length.begin(), length.end(), 0.0);
  if (total > 0.0) {
    const double q = std::ldexp(1.0, std::ilogb(total) + 2 - 52);
    for (double& l : length) l = std::nearbyint(l / q) * q;
  }

  FppDistances out;
  out.n = n;
  out.distance.assign(n * n, kForever);
  out.max_edge.assign(n * n, 0.0);
  using Item = std::pair<double, AgentId>;
  for (AgentId s = 0; s < n; ++s) {
    double* dist = &out.distance[s * n];
    double* top = &out.max_edge[s * n];
    std::vector<char> done(n, 0);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[s] = 0.0;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
      const auto [d, a] = heap.top();
      heap.pop();
      if (done[a]) continue;
      done[a] = 1;
      for (const auto& nb : g.neighbors(a)) {
        const double cand = d + length[nb.edge];
        if (cand < dist[nb.agent]) {
          dist[nb.agent] = cand;
          top[nb.agent] = std::max(top[a], length[nb.edge]);
          heap.emplace(cand, nb.agent);
        }
      }
    }
  }
  // Dijkstra from each end can pick different geodesics only on exact ties,
  // which have probability zero; symmetrize to make T_ij = T_ji by construction.
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      out.distance[b * n + a] = out.distance[a * n + b];
      out.max_edge[b * n + a] = out.max_edge[a * n + b];
    }
  }
  return out;
}

// ---- Averaging ------------------------------------------------------------------------

bool is_probability(std::span<const double> x, double tolerance) {
  double sum = 0.0;
  for (double v : x) {
    if (v < 0.0) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

AveragingRun run_averaging(const Geometry& g, std::vector<double> x0, EventStream& stream,
                           std::span<const double> sample_times, const AveragingOptions& options) {
  check_sample_times(sample_times);
  const bool probability = is_probability(x0);
  Averaging rule(g, std::move(x0));
  AveragingRun out;
  const double e0 = rule.dirichlet();
  // The incremental Dirichlet form carries rounding of order eps * E(0);
  // once E is that small relative to E(0), recompute it exactly.
  bool exact_mode = false;
  auto energy = [&] {
    if (!exact_mode && rule.dirichlet() < 1e-6 * e0) exact_mode = true;
    return exact_mode ? rule.dirichlet_exact() : rule.dirichlet();
  };
  std::optional<double> last_entropy;
  auto observe = [&](double t) {
    AveragingSample s;
    s.t = t;
    s.x = rule.money();
    s.norm = l2_norm(s.x);
    s.dirichlet = energy();
    if (probability) {
      s.entropy = entropy(s.x);
      if (last_entropy && *s.entropy < *last_entropy - 1e-12) {
        out.entropy_monotone = false;
      }
      last_entropy = s.entropy;
    }
    out.samples.push_back(std::move(s));
  };

  std::size_t next_sample = 0;
  double t_prev = 0.0;
  double current = e0;
  const double cutoff = options.dirichlet_cutoff * e0;
  out.absorbed = rule.absorbed();
  while (!out.absorbed) {
    const bool samples_done = next_sample == sample_times.size();
    if (samples_done && (!options.integrate_dirichlet || current <= cutoff)) break;
    const MeetingEvent* ev = stream.peek();
    if (ev == nullptr) break;
    while (next_sample < sample_times.size() && sample_times[next_sample] < ev->t) {
      observe(sample_times[next_sample++]);
    }
    out.dirichlet_integral += current * (ev->t - t_prev);
    t_prev = ev->t;
    rule.apply(*ev);
    ++out.events;
    if (probability && rule.last_entropy_delta() < -options.entropy_tolerance) {
      out.entropy_monotone = false;
      ++out.entropy_violations;
    }
    current = energy();
    out.absorbed = rule.absorbed();
    stream.next();
  }
  if (!out.absorbed && std::isfinite(stream.horizon()) && stream.peek() == nullptr) {
    out.dirichlet_integral += current * (stream.horizon() - t_prev);
  }
  const double limit = out.absorbed ? kForever : stream.horizon();
  while (next_sample < sample_times.size() && sample_times[next_sample] <= limit) {
    observe(sample_times[next_sample++]);
  }
  return out;
}

// Stationary rules never absorb, so the run must be cut off by the stream.
void require_finite_horizon(const EventStream& stream, const char* rule) {
  if (!std::isfinite(stream.horizon())) {
    throw InvalidArgument(std::string(rule) + " never absorbs: the stream needs a finite horizon");
  }
}

std::vector<PennySample> run_coupled_pennies(AgentId i0, AgentId j0, EventStream& stream,
                                             std::span<const double> sample_times) {
  check_sample_times(sample_times);
  check_agent(i0, stream.n(), "pennies");
  check_agent(j0, stream.n(), "pennies");
  require_finite_horizon(stream, "pennies");
  CoupledPennies rule(i0, j0);
  std::vector<PennySample> out;
  run(rule, stream, sample_times,
      [&](double t) { out.push_back({t, rule.first(), rule.second()}); });
  return out;
}

// ---- Voter and coalescing ----------------------------------------------------------------

double q_statistic(std::span<const std::uint32_t> block_sizes, std::size_t n) {
  // Integer sum of squares, one rounding.
  std::uint64_t sum = 0;
  for (auto b : block_sizes) sum += static_cast<std::uint64_t>(b) * b;
  const double nd = static_cast<double>(n);
  return static_cast<double>(sum) / (nd * nd);
}

double partition_entropy(std::span<const std::uint32_t> block_sizes, std::size_t n) {
  double sum = 0.0;
  for (auto b : block_sizes) {
    if (b == 0) continue;
    const double p = static_cast<double>(b) / static_cast<double>(n);
    sum -= p * std::log(p);
  }
  return sum;
}

VoterRun run_voter(const Geometry& g, EventStream& stream, std::span<const double> sample_times) {
  check_sample_times(sample_times);
  Voter rule(g.n());
  VoterRun out;
  const double total = g.total_rate();
  auto observe = [&](double) {
    out.blocks.push_back(nonzero_descending(rule.counts()));
    double same = 0.0;
    for (const auto& e : g.edges()) {
      if (rule.opinions()[e.i] == rule.opinions()[e.j]) same += e.rate;
    }
    out.concordance.push_back(total > 0.0 ? same / total : 1.0);
  };
  const RunResult r = run(rule, stream, sample_times, observe);
  out.consensus_time = r.absorbed ? r.absorption_time : kForever;
  return out;
}

VoterTwoRun run_voter_two(const Geometry& g, std::uint32_t k, EventStream& stream) {
  const std::size_t n = g.n();
  if (k < 1 || k + 1 > n) throw InvalidArgument("two-opinion voter needs 1 <= k <= n-1");
  std::vector<std::uint32_t> opinions(n, 1);
  std::fill(opinions.begin(), opinions.begin() + k, 0);
  Voter rule(std::move(opinions));
  VoterTwoRun out;
  out.count_path.emplace_back(0.0, k);
  std::uint32_t count = k;
  while (!rule.absorbed()) {
    const auto ev = stream.next();
    if (!ev) break;
    rule.apply(*ev);
    if (rule.counts()[0] != count) {
      count = rule.counts()[0];
      out.count_path.emplace_back(ev->t, count);
    }
  }
  if (rule.absorbed()) out.hit_time = out.count_path.back().first;
  out.final_count = count;
  return out;
}

CoalescingRun run_coalescing(const Geometry& g, EventStream& stream,
                             std::span<const double> sample_times, bool track_meetings) {
  check_sample_times(sample_times);
  Coalescing rule(g.n(), track_meetings);
  CoalescingRun out;
  auto observe = [&](double) {
    std::vector<std::uint32_t> sizes;
    for (const auto& c : rule.clusters()) {
      if (!c.empty()) sizes.push_back(static_cast<std::uint32_t>(c.size()));
    }
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    out.blocks.push_back(std::move(sizes));
  };
  const RunResult r = run(rule, stream, sample_times, observe);
  out.coalescence_time = r.absorbed ? r.absorption_time : kForever;
  out.count_path = rule.count_path();
  if (track_meetings) out.first_meeting = rule.first_meeting();
  return out;
}

double sample_meeting_time(AgentId a, AgentId b, EventStream& first, EventStream& second) {
  check_agent(a, first.n(), "meeting");
  check_agent(b, second.n(), "meeting");
  TokenProcess p(first.n(), a, true);
  TokenProcess q(second.n(), b, true);
  if (a == b) return 0.0;
  for (;;) {
    const MeetingEvent* e1 = first.peek();
    const MeetingEvent* e2 = second.peek();
    if (e1 == nullptr && e2 == nullptr) return kForever;
    const bool take_first = e2 == nullptr || (e1 != nullptr && e1->t <= e2->t);
    const MeetingEvent ev = take_first ? *first.next() : *second.next();
    (take_first ? p : q).apply(ev);
    if (p.holder() == q.holder()) return ev.t;
  }
}

DualityReport voter_coalescing_duality_test(const Geometry& g, double t, std::size_t replicas,
                                            std::uint64_t master_seed,
                                            std::span<const double> survival_times) {
  if (g.n() > 10) throw UnsupportedSize("voter/coalescing duality test supports n <= 10");
  if (replicas < 2) throw InvalidArgument("duality test needs at least 2 replicas");
  DualityReport rep;
  rep.t = t;
  rep.replicas = replicas;
  rep.survival_times.assign(survival_times.begin(), survival_times.end());
  const double horizon = std::max(
      t, survival_times.empty() ? 0.0 : *std::max_element(survival_times.begin(), survival_times.end()));
  auto sampler = std::make_shared<const MeetingSampler>(g);
  const double sample_t[] = {t};

  std::map<std::vector<std::uint32_t>, std::pair<double, double>> table;
  std::vector<double> voter_alive(survival_times.size(), 0.0);
  std::vector<double> coal_alive(survival_times.size(), 0.0);
  for (std::size_t r = 0; r < replicas; ++r) {
    // Independent keys for the two sides.
    EventStream vs(sampler, replica_key(master_seed, 2 * r), horizon);
    EventStream cs(sampler, replica_key(master_seed, 2 * r + 1), horizon);
    const auto v = run_voter(g, vs, sample_t);
    const auto c = run_coalescing(g, cs, sample_t);
    table[v.blocks.at(0)].first += 1.0;
    table[c.blocks.at(0)].second += 1.0;
    for (std::size_t k = 0; k < survival_times.size(); ++k) {
      voter_alive[k] += v.consensus_time > survival_times[k] ? 1.0 : 0.0;
      coal_alive[k] += c.coalescence_time > survival_times[k] ? 1.0 : 0.0;
    }
  }
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& [key, counts] : table) {
    a.push_back(counts.first);
    b.push_back(counts.second);
  }
  const auto chi = chi_squared_two_sample(a, b);
  rep.chi_squared = chi.statistic;
  rep.dof = chi.dof;
  rep.p_value = chi.p_value;
  const double m = static_cast<double>(replicas);
  for (std::size_t k = 0; k < survival_times.size(); ++k) {
    const double pv = voter_alive[k] / m;
    const double pc = coal_alive[k] / m;
    const double se = std::sqrt(pv * (1.0 - pv) / m + pc * (1.0 - pc) / m);
    rep.voter_survival.push_back(pv);
    rep.coalescing_survival.push_back(pc);
    rep.survival_se.push_back(se);
    if (std::abs(pv - pc) > 3.0 * se) rep.survival_agree = false;
  }
  return rep;
}

// ---- Gambler --------------------------------------------------------------------------------

GamblerRun run_gambler(const Geometry& g, std::vector<double> x0, EventStream& stream) {
  Gambler rule(g, std::move(x0));
  const RunResult r = run(rule, stream);
  return GamblerRun{rule.money(), r.absorption_time, r.absorbed};
}

bool is_independent_support(const Geometry& g, std::span<const double> money) {
  for (const auto& e : g.edges()) {
    if (money[e.i] > 0.0 && money[e.j] > 0.0) return false;
  }
  return true;
}

// ---- Interchange ------------------------------------------------------------------------------

std::vector<InterchangeSample> run_interchange(const Geometry& g, EventStream& stream,
                                               std::span<const double> sample_times) {
  check_sample_times(sample_times);
  require_finite_horizon(stream, "interchange");
  Interchange rule(g.n());
  std::vector<InterchangeSample> out;
  run(rule, stream, sample_times, [&](double t) { out.push_back({t, rule.token_at()}); });
  return out;
}

InterchangeGaps interchange_gap_bruteforce(const Geometry& g) {
  const std::size_t n = g.n();
  if (n > kMaxInterchangeAgents) {
    throw UnsupportedSize("interchange brute force supports n <= 6");
  }
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  auto encode = [&](const std::vector<std::uint32_t>& p) {
    std::uint64_t code = 0;
    for (auto v : p) code = code * n + v;
    return code;
  };
  std::vector<std::vector<std::uint32_t>> states;
  std::unordered_map<std::uint64_t, std::size_t> index;
  do {
    index.emplace(encode(perm), states.size());
    states.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  const auto size = static_cast<Eigen::Index>(states.size());
  Matrix q = Matrix::Zero(size, size);
  for (std::size_t s = 0; s < states.size(); ++s) {
    for (const auto& e : g.edges()) {
      auto next = states[s];
      std::swap(next[e.i], next[e.j]);
      const auto t = static_cast<Eigen::Index>(index.at(encode(next)));
      const auto si = static_cast<Eigen::Index>(s);
      q(si, t) += e.rate;
      q(si, si) -= e.rate;
    }
  }
  InterchangeGaps out;
  if (size == 1) {
    out.lambda_ip = 0.0;
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(q, Eigen::EigenvaluesOnly);
    out.lambda_ip = -solver.eigenvalues()(size - 2);
  }
  out.lambda_mc = n > 1 ? spectral_gap(generator(g)) : 0.0;
  return out;
}

// ---- Deference --------------------------------------------------------------------------------

DeferenceRun run_deference(const Geometry& g, EventStream& stream,
                           std::span<const double> sample_times, std::size_t top_k) {
  check_sample_times(sample_times);
  const std::size_t n = g.n();
  top_k = std::min(top_k, n);
  Deference rule(n);
  DeferenceRun out;
  out.label1_times.assign(n, kForever);
  out.label1_times[0] = 0.0;
  auto observe = [&] {
    std::vector<double> share(top_k);
    for (std::size_t k = 0; k < top_k; ++k) {
      share[k] = static_cast<double>(rule.counts()[k]) / static_cast<double>(n);
    }
    out.shares.push_back(std::move(share));
  };
  std::size_t next_sample = 0;
  while (!rule.absorbed()) {
    const MeetingEvent* ev = stream.peek();
    if (ev == nullptr) break;
    while (next_sample < sample_times.size() && sample_times[next_sample] < ev->t) {
      observe();
      ++next_sample;
    }
    const bool zero_i = rule.labels()[ev->i] == 0;
    const bool zero_j = rule.labels()[ev->j] == 0;
    rule.apply(*ev);
    if (zero_i != zero_j) out.label1_times[zero_i ? ev->j : ev->i] = ev->t;
    stream.next();
  }
  const double limit = rule.absorbed() ? kForever : stream.horizon();
  while (next_sample < sample_times.size() && sample_times[next_sample] <= limit) {
    observe();
    ++next_sample;
  }
  return out;
}

// ---- Fashionista ------------------------------------------------------------------------------


FashionistaRun run_fashionista(const Geometry& g, double lambda, EventStream& stream,
                               std::span<const double> sample_times) {
  Fashionista rule(g.n());
  FashionistaRun out;
  detail::drive_fashionista(rule, g.n(), lambda, stream, sample_times, [&](double) {
    out.diversity.push_back(rule.diversity());
    out.live_fashions.push_back(rule.live_fashions());
  });
  out.originations = rule.originations();
  return out;
}

}  // namespace fmie
