#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <string>

#include "fmie/error.hpp"
#include "fmie/geometry.hpp"

namespace fmie {

namespace {

void require_small(const Geometry& g) {
  if (g.n() > kMaxBottleneckAgents) {
    throw UnsupportedSize("exhaustive bottleneck supports n <= " +
                          std::to_string(kMaxBottleneckAgents) + " (got " + std::to_string(g.n()) +
                          ")");
  }
  if (g.n() < 2) throw InvalidArgument("bottleneck needs n >= 2");
}

std::vector<AgentId> members(std::uint32_t mask) {
  std::vector<AgentId> out;
  for (AgentId a = 0; mask != 0; ++a, mask >>= 1) {
    if (mask & 1u) out.push_back(a);
  }
  return out;
}

}  // namespace

double flow(const Geometry& g, std::span<const AgentId> subset) {
  std::vector<char> in(g.n(), 0);
  for (auto a : subset) in.at(a) = 1;
  double cut = 0.0;
  for (const auto& e : g.edges()) {
    if (in[e.i] != in[e.j]) cut += e.rate;
  }
  return cut / static_cast<double>(g.n());
}

std::vector<BottleneckReport> bottleneck_profile(const Geometry& g) {
  require_small(g);
  const std::size_t n = g.n();
  const auto degree = g.row_sums();

  // Gray-code walk over all subsets; cut and per-agent weight into A are
  // updated incrementally in extended precision.
  std::vector<long double> into(n, 0.0L);
  std::vector<long double> best(n, std::numeric_limits<long double>::infinity());
  std::vector<std::uint32_t> best_mask(n, 0);
  long double cut = 0.0L;
  std::uint32_t mask = 0;
  std::size_t size = 0;
  const std::uint64_t steps = (std::uint64_t{1} << n) - 1;
  for (std::uint64_t step = 1; step <= steps; ++step) {
    const auto v = static_cast<AgentId>(std::countr_zero(step));
    const bool entering = (mask & (1u << v)) == 0;
    if (entering) {
      cut += static_cast<long double>(degree[v]) - 2.0L * into[v];
      ++size;
    } else {
      cut -= static_cast<long double>(degree[v]) - 2.0L * into[v];
      --size;
    }
    mask ^= (1u << v);
    const long double sign = entering ? 1.0L : -1.0L;
    for (const auto& nb : g.neighbors(v)) into[nb.agent] += sign * nb.rate;
    if (size == 0 || size == n) continue;
    if (best_mask[size] == 0 || cut < best[size] - 1e-15L * std::max(best[size], 1.0L)) {
      best[size] = cut;
      best_mask[size] = mask;
    }
  }

  std::vector<BottleneckReport> reports(n - 1);
  const double nd = static_cast<double>(n);
  double kappa_value = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m < n; ++m) {
    auto& r = reports[m - 1];
    r.m = m;
    r.argmin_subset = members(best_mask[m]);
    r.phi = flow(g, r.argmin_subset);
    const double md = static_cast<double>(m);
    kappa_value = std::min(kappa_value, nd * (nd - 1.0) * r.phi / (md * (nd - md)));
  }
  for (auto& r : reports) r.kappa = kappa_value;
  return reports;
}

BottleneckReport bottleneck(const Geometry& g, std::size_t m) {
  if (m < 1 || m >= g.n()) throw InvalidArgument("bottleneck subset size must be in [1, n-1]");
  return bottleneck_profile(g)[m - 1];
}

double kappa(const Geometry& g) {
  require_small(g);
  const std::size_t n = g.n();
  const double nd = static_cast<double>(n);
  const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1);
  double best = std::numeric_limits<double>::infinity();
  // Subsets containing agent 0 suffice: nu(A,A^c) and |A|(n-|A|) are
  // invariant under complement.
  for (std::uint32_t mask = 1; mask < full; mask += 2) {
    double cut = 0.0;
    for (const auto& e : g.edges()) {
      if (((mask >> e.i) ^ (mask >> e.j)) & 1u) cut += e.rate;
    }
    const double size = static_cast<double>(std::popcount(mask));
    best = std::min(best, (nd - 1.0) * cut / (size * (nd - size)));
  }
  return best;
}

}  // namespace fmie
