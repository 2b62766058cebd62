#include "fmie/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fmie/error.hpp"
#include "fmie/rng.hpp"

namespace fmie {

namespace {

// Union-find over agents, used for connectivity and component extraction.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }
  std::size_t size_of(std::size_t a) { return size_[find(a)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

std::size_t checked_power(std::size_t base, std::size_t exponent, const char* what) {
  std::size_t result = 1;
  for (std::size_t k = 0; k < exponent; ++k) {
    if (result > std::numeric_limits<AgentId>::max() / base) {
      throw InvalidArgument(std::string(what) + ": agent count overflows");
    }
    result *= base;
  }
  return result;
}

std::string fmt_param(double x) {
  std::string s = std::to_string(x);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

// Squared Euclidean distance on the torus (wraparound per coordinate).
double torus_distance(std::size_t a, std::size_t b, std::size_t m, std::size_t d) {
  double sum = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t ca = a % m;
    const std::size_t cb = b % m;
    a /= m;
    b /= m;
    const std::size_t diff = ca > cb ? ca - cb : cb - ca;
    const double w = static_cast<double>(std::min(diff, m - diff));
    sum += w * w;
  }
  return std::sqrt(sum);
}

std::vector<Edge> lattice_edges(std::size_t m, std::size_t d, double rate) {
  const std::size_t n = checked_power(m, d, "torus");
  std::vector<Edge> edges;
  edges.reserve(n * d * 2);
  std::size_t stride = 1;
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t coord = (a / stride) % m;
      const std::size_t up = coord + 1 == m ? a - coord * stride : a + stride;
      const std::size_t down = coord == 0 ? a + (m - 1) * stride : a - stride;
      edges.push_back({static_cast<AgentId>(a), static_cast<AgentId>(up), rate});
      edges.push_back({static_cast<AgentId>(a), static_cast<AgentId>(down), rate});
    }
    stride *= m;
  }
  // Each undirected lattice edge was emitted from both endpoints; halve so
  // that merging restores the per-pair rate (and sums +1/-1 when m = 2).
  for (auto& e : edges) e.rate *= 0.5;
  return edges;
}

}  // namespace

bool is_connected(std::size_t n, std::span<const Edge> edges) {
  if (n == 0) return false;
  DisjointSets sets(n);
  for (const auto& e : edges) {
    if (e.rate > 0.0) sets.unite(e.i, e.j);
  }
  return sets.size_of(0) == n;
}

Geometry::Geometry(std::size_t n, std::vector<Edge> edges, std::string label)
    : n_(n), label_(std::move(label)) {
  if (n < 1) throw InvalidArgument("geometry needs at least one agent");
  if (n > std::numeric_limits<AgentId>::max()) throw InvalidArgument("too many agents");
  for (auto& e : edges) {
    if (e.i >= n || e.j >= n) throw InvalidArgument("edge endpoint out of range");
    if (e.i == e.j) throw InvalidArgument("self-loop at agent " + std::to_string(e.i));
    if (!std::isfinite(e.rate) || e.rate < 0.0) throw InvalidArgument("rates must be finite and nonnegative");
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::erase_if(edges, [](const Edge& e) { return e.rate == 0.0; });
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (const auto& e : edges) {
    if (!edges_.empty() && edges_.back().i == e.i && edges_.back().j == e.j) {
      edges_.back().rate += e.rate;
    } else {
      edges_.push_back(e);
    }
  }
  if (!is_connected(n_, edges_)) {
    throw InvalidArgument("geometry '" + label_ + "' is not irreducible (positive-rate graph disconnected)");
  }

  offsets_.assign(n_ + 1, 0);
  for (const auto& e : edges_) {
    ++offsets_[e.i + 1];
    ++offsets_[e.j + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  adjacency_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::uint32_t k = 0; k < edges_.size(); ++k) {
    const auto& e = edges_[k];
    adjacency_[fill[e.i]++] = {e.j, e.rate, k};
    adjacency_[fill[e.j]++] = {e.i, e.rate, k};
  }
  for (std::size_t a = 0; a < n_; ++a) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[a]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[a + 1]),
              [](const Neighbor& x, const Neighbor& y) { return x.agent < y.agent; });
  }
}

double Geometry::rate(AgentId a, AgentId b) const {
  const auto row = neighbors(a);
  const auto it = std::lower_bound(row.begin(), row.end(), b,
                                   [](const Neighbor& x, AgentId v) { return x.agent < v; });
  return (it != row.end() && it->agent == b) ? it->rate : 0.0;
}

std::vector<double> Geometry::row_sums() const {
  std::vector<double> sums(n_, 0.0);
  for (std::size_t a = 0; a < n_; ++a) {
    for (const auto& nb : neighbors(static_cast<AgentId>(a))) sums[a] += nb.rate;
  }
  return sums;
}

double Geometry::total_rate() const {
  double total = 0.0;
  for (const auto& e : edges_) total += e.rate;
  return total;
}

std::vector<std::size_t> torus_coords(std::size_t a, std::size_t m, std::size_t d) {
  std::vector<std::size_t> coords(d);
  for (std::size_t k = 0; k < d; ++k) {
    coords[k] = a % m;
    a /= m;
  }
  return coords;
}

std::size_t torus_index(std::span<const std::size_t> coords, std::size_t m) {
  std::size_t a = 0;
  for (std::size_t k = coords.size(); k-- > 0;) a = a * m + coords[k];
  return a;
}

Geometry build_complete(std::size_t n) {
  if (n < 2) throw InvalidArgument("complete graph needs n >= 2");
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  const double rate = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      edges.push_back({static_cast<AgentId>(i), static_cast<AgentId>(j), rate});
    }
  }
  return Geometry(n, std::move(edges), "complete(n=" + std::to_string(n) + ")");
}

Geometry build_torus(std::size_t m, std::size_t d) {
  if (m < 2 || d < 1) throw InvalidArgument("torus needs m >= 2 and d >= 1");
  const std::size_t n = checked_power(m, d, "torus");
  return Geometry(n, lattice_edges(m, d, 1.0 / static_cast<double>(2 * d)),
                  "torus(m=" + std::to_string(m) + ",d=" + std::to_string(d) + ")");
}

Geometry build_hamming_cube(std::size_t d) {
  if (d < 1) throw InvalidArgument("Hamming cube needs d >= 1");
  const std::size_t n = checked_power(2, d, "Hamming cube");
  const double rate = 1.0 / static_cast<double>(d);
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t b = a ^ (std::size_t{1} << k);
      if (a < b) edges.push_back({static_cast<AgentId>(a), static_cast<AgentId>(b), rate});
    }
  }
  return Geometry(n, std::move(edges), "hamming(d=" + std::to_string(d) + ")");
}

Geometry build_small_world(std::size_t m, std::size_t d, double gamma, double extra_density,
                           std::uint64_t seed) {
  if (m < 2 || d < 1) throw InvalidArgument("small world needs m >= 2 and d >= 1");
  if (!(gamma >= 0.0) || !(extra_density >= 0.0) || !std::isfinite(gamma) ||
      !std::isfinite(extra_density)) {
    throw InvalidArgument("small world needs gamma >= 0 and extra_density >= 0");
  }
  const std::size_t n = checked_power(m, d, "small world");
  std::vector<Edge> edges = lattice_edges(m, d, 1.0);
  for (auto& e : edges) {
    if (e.i > e.j) std::swap(e.i, e.j);
    e.rate = 1.0;
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const Edge& a, const Edge& b) { return a.i == b.i && a.j == b.j; }),
              edges.end());
  std::vector<Edge> extra;
  if (extra_density > 0.0) {
    Rng rng(StreamKey{seed, 0});
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        while (cursor < edges.size() &&
               (edges[cursor].i < i || (edges[cursor].i == i && edges[cursor].j < j))) {
          ++cursor;
        }
        const bool lattice = cursor < edges.size() && edges[cursor].i == i && edges[cursor].j == j;
        if (lattice) continue;
        const double p = std::min(1.0, extra_density * std::pow(torus_distance(i, j, m, d), -gamma));
        if (rng.uniform() < p) {
          extra.push_back({static_cast<AgentId>(i), static_cast<AgentId>(j), 1.0});
        }
      }
    }
  }
  edges.insert(edges.end(), extra.begin(), extra.end());
  return Geometry(n, std::move(edges),
                  "small_world(m=" + std::to_string(m) + ",d=" + std::to_string(d) +
                      ",gamma=" + fmt_param(gamma) + ",density=" + fmt_param(extra_density) +
                      ",seed=" + std::to_string(seed) + ")");
}

Geometry build_config_model(std::span<const double> degree_law, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("configuration model needs n >= 2");
  double mass = 0.0;
  double mean = 0.0;
  for (std::size_t k = 0; k < degree_law.size(); ++k) {
    if (!(degree_law[k] >= 0.0) || !std::isfinite(degree_law[k])) {
      throw InvalidArgument("degree law entries must be finite and nonnegative");
    }
    mass += degree_law[k];
    mean += static_cast<double>(k) * degree_law[k];
  }
  if (mass <= 0.0) throw InvalidArgument("degree law is degenerate (no mass)");
  mean /= mass;
  if (mean < 1.0) throw InvalidArgument("degree law must have mean >= 1");

  Rng rng(StreamKey{seed, 0});
  std::vector<std::size_t> degree(n);
  for (auto& deg : degree) {
    double u = rng.uniform() * mass;
    std::size_t k = 0;
    while (k + 1 < degree_law.size() && u >= degree_law[k]) {
      u -= degree_law[k];
      ++k;
    }
    while (degree_law[k] == 0.0 && k > 0) --k;  // guard against rounding into an empty cell
    deg = k;
  }
  std::size_t total = std::accumulate(degree.begin(), degree.end(), std::size_t{0});
  if (total % 2 == 1) {
    ++degree[rng.below(n)];
    ++total;
  }
  std::vector<AgentId> stubs;
  stubs.reserve(total);
  for (std::size_t a = 0; a < n; ++a) stubs.insert(stubs.end(), degree[a], static_cast<AgentId>(a));
  for (std::size_t k = stubs.size(); k > 1; --k) {
    std::swap(stubs[k - 1], stubs[rng.below(k)]);
  }
  std::vector<Edge> raw;
  for (std::size_t k = 0; k + 1 < stubs.size(); k += 2) {
    AgentId a = stubs[k];
    AgentId b = stubs[k + 1];
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    raw.push_back({a, b, 1.0});
  }
  std::sort(raw.begin(), raw.end(), [](const Edge& x, const Edge& y) {
    return x.i != y.i ? x.i < y.i : x.j < y.j;
  });
  raw.erase(std::unique(raw.begin(), raw.end(),
                        [](const Edge& x, const Edge& y) { return x.i == y.i && x.j == y.j; }),
            raw.end());

  DisjointSets sets(n);
  for (const auto& e : raw) sets.unite(e.i, e.j);
  std::size_t best_root = sets.find(0);
  std::size_t best_size = 0;
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t root = sets.find(a);
    const std::size_t size = sets.size_of(a);
    if (size > best_size || (size == best_size && root < best_root)) {
      best_size = size;
      best_root = root;
    }
  }
  if (best_size < 2) throw InvalidArgument("configuration model produced no edges");
  std::vector<AgentId> relabel(n, std::numeric_limits<AgentId>::max());
  AgentId next = 0;
  for (std::size_t a = 0; a < n; ++a) {
    if (sets.find(a) == best_root) relabel[a] = next++;
  }
  std::vector<Edge> edges;
  for (const auto& e : raw) {
    if (relabel[e.i] != std::numeric_limits<AgentId>::max()) {
      edges.push_back({relabel[e.i], relabel[e.j], 1.0});
    }
  }
  return Geometry(best_size, std::move(edges),
                  "config_model(n=" + std::to_string(n) + ",seed=" + std::to_string(seed) + ")");
}

Geometry build_long_range_torus(std::size_t m, std::size_t d, double gamma) {
  if (m < 2 || d < 1) throw InvalidArgument("long-range torus needs m >= 2 and d >= 1");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgument("long-range exponent gamma must be finite and >= 0");
  }
  const std::size_t n = checked_power(m, d, "long-range torus");
  const Geometry lattice = build_torus(m, d);
  std::vector<Edge> edges(lattice.edges().begin(), lattice.edges().end());
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      while (cursor < lattice.edges().size() &&
             (lattice.edges()[cursor].i < i ||
              (lattice.edges()[cursor].i == i && lattice.edges()[cursor].j < j))) {
        ++cursor;
      }
      const bool adjacent = cursor < lattice.edges().size() && lattice.edges()[cursor].i == i &&
                            lattice.edges()[cursor].j == j;
      if (adjacent) continue;
      const double w = std::pow(torus_distance(i, j, m, d), -gamma);
      if (w > 0.0) edges.push_back({static_cast<AgentId>(i), static_cast<AgentId>(j), w});
    }
  }
  // Vertex-transitive: every row has the same raw sum; normalize by row 0.
  double row0 = 0.0;
  for (const auto& e : edges) {
    if (e.i == 0 || e.j == 0) row0 += e.rate;
  }
  const double c = 1.0 / row0;
  for (auto& e : edges) e.rate *= c;
  return Geometry(n, std::move(edges),
                  "long_range_torus(m=" + std::to_string(m) + ",d=" + std::to_string(d) +
                      ",gamma=" + fmt_param(gamma) + ")");
}

Geometry build_two_scale_torus(std::size_t m, double alpha) {
  if (m < 3) throw InvalidArgument("two-scale torus needs m >= 3");
  if (!(alpha > 0.0 && alpha < 3.0)) throw InvalidArgument("two-scale torus needs 0 < alpha < 3");
  const std::size_t n = checked_power(m, 2, "two-scale torus");
  const Geometry lattice = build_torus(m, 2);
  std::vector<Edge> edges(lattice.edges().begin(), lattice.edges().end());
  const double far_rate =
      std::pow(static_cast<double>(m), -alpha) / static_cast<double>(m * m - 5);
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      while (cursor < lattice.edges().size() &&
             (lattice.edges()[cursor].i < i ||
              (lattice.edges()[cursor].i == i && lattice.edges()[cursor].j < j))) {
        ++cursor;
      }
      const bool adjacent = cursor < lattice.edges().size() && lattice.edges()[cursor].i == i &&
                            lattice.edges()[cursor].j == j;
      if (!adjacent) edges.push_back({static_cast<AgentId>(i), static_cast<AgentId>(j), far_rate});
    }
  }
  return Geometry(n, std::move(edges),
                  "two_scale_torus(m=" + std::to_string(m) + ",alpha=" + fmt_param(alpha) + ")");
}

Geometry build_path(std::size_t n, double rate) {
  if (n < 2) throw InvalidArgument("path needs n >= 2");
  std::vector<Edge> edges;
  for (std::size_t a = 0; a + 1 < n; ++a) {
    edges.push_back({static_cast<AgentId>(a), static_cast<AgentId>(a + 1), rate});
  }
  return Geometry(n, std::move(edges), "path(n=" + std::to_string(n) + ")");
}

Geometry build_cycle(std::size_t n, double rate) {
  if (n < 3) throw InvalidArgument("cycle needs n >= 3");
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < n; ++a) {
    edges.push_back({static_cast<AgentId>(a), static_cast<AgentId>((a + 1) % n), rate});
  }
  return Geometry(n, std::move(edges), "cycle(n=" + std::to_string(n) + ")");
}

Geometry build_star(std::size_t n, double rate) {
  if (n < 2) throw InvalidArgument("star needs n >= 2");
  std::vector<Edge> edges;
  for (std::size_t a = 1; a < n; ++a) edges.push_back({0, static_cast<AgentId>(a), rate});
  return Geometry(n, std::move(edges), "star(n=" + std::to_string(n) + ")");
}

Standardized standardize(const Geometry& g) {
  const auto sums = g.row_sums();
  const double max_row = *std::max_element(sums.begin(), sums.end());
  double scale = 1.0 / max_row;
  if (std::abs(scale - 1.0) <= 1e-12) return {g, 1.0};
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  for (auto& e : edges) e.rate *= scale;
  return {Geometry(g.n(), std::move(edges), g.label()), scale};
}

}  // namespace fmie
