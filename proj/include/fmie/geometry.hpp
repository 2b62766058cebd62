#pragma once

// Weighted meeting geometries: a symmetric nonnegative rate array nu_ij over
// n agents, stored as an edge list of unordered pairs with positive rates.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fmie {

using AgentId = std::uint32_t;

struct Edge {
  AgentId i = 0;
  AgentId j = 0;
  double rate = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Neighbor entry in the adjacency view: (other agent, rate, edge index).
struct Neighbor {
  AgentId agent;
  double rate;
  std::uint32_t edge;
};

/// Immutable symmetric geometry.
///
/// Invariants (checked on construction): i < j for every stored edge, rates
/// strictly positive and finite, edges sorted lexicographically with no
/// duplicates, and the positive-rate graph is connected.
class Geometry {
 public:
  /// Builds from an arbitrary edge list. Endpoint order is normalized,
  /// duplicate pairs are merged by summing their rates, zero-rate entries are
  /// dropped. Throws InvalidArgument on self-loops, negative or non-finite
  /// rates, out-of-range agents, or a disconnected result.
  Geometry(std::size_t n, std::vector<Edge> edges, std::string label);

  std::size_t n() const { return n_; }
  std::span<const Edge> edges() const { return edges_; }
  const std::string& label() const { return label_; }

  std::span<const Neighbor> neighbors(AgentId a) const {
    return {adjacency_.data() + offsets_[a], adjacency_.data() + offsets_[a + 1]};
  }

  /// nu_ij, zero when the pair is not an edge. O(log deg).
  double rate(AgentId a, AgentId b) const;

  /// sum_j nu_ij for each agent.
  std::vector<double> row_sums() const;
  double total_rate() const;  // sum over unordered pairs

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::string label_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
};

/// True when the positive-rate graph on n agents is connected.
bool is_connected(std::size_t n, std::span<const Edge> edges);

// ---- standard geometries ----------------------------------------------------

Geometry build_complete(std::size_t n);
Geometry build_torus(std::size_t m, std::size_t d);
Geometry build_hamming_cube(std::size_t d);

/// Torus with rate-1 lattice edges plus independent long edges: each
/// non-lattice pair is joined with probability min(1, density * |i-j|^-gamma)
/// at rate 1, |.| the Euclidean torus distance.
Geometry build_small_world(std::size_t m, std::size_t d, double gamma, double extra_density,
                           std::uint64_t seed);

/// Configuration model with i.i.d. degrees from `degree_law` (degree_law[k] is
/// the probability of degree k). Self-loops dropped, multi-edges collapsed,
/// largest component returned and relabeled in increasing order. Rate 1 per
/// edge.
Geometry build_config_model(std::span<const double> degree_law, std::size_t n,
                            std::uint64_t seed);

/// Torus whose non-adjacent pairs also meet at rate proportional to
/// |i-j|^-gamma. Raw weights are 1/(2d) per lattice edge and |i-j|^-gamma
/// otherwise; one constant rescales every rate so rows sum to 1.
Geometry build_long_range_torus(std::size_t m, std::size_t d, double gamma);

/// Two-dimensional m x m torus: neighbor rate 1/4 each, plus total rate
/// m^-alpha spread uniformly over the m^2 - 5 non-neighbors. 0 < alpha < 3.
Geometry build_two_scale_torus(std::size_t m, double alpha);

// Small fixtures used throughout tests and suites (rate 1 per edge unless
// stated otherwise).
Geometry build_path(std::size_t n, double rate = 1.0);
Geometry build_cycle(std::size_t n, double rate = 1.0);
Geometry build_star(std::size_t n, double rate = 1.0);

/// Coordinates of torus agent `a` (little-endian digits base m).
std::vector<std::size_t> torus_coords(std::size_t a, std::size_t m, std::size_t d);
std::size_t torus_index(std::span<const std::size_t> coords, std::size_t m);

// ---- standardization ----------------------------------------------------------

struct Standardized {
  Geometry geometry;
  double scale;  // every rate was multiplied by this
};

/// Rescales time by one constant so the largest row sum is 1.
Standardized standardize(const Geometry& g);

// ---- bottleneck statistics ---------------------------------------------------

inline constexpr std::size_t kMaxBottleneckAgents = 22;

struct BottleneckReport {
  std::size_t m = 0;
  double phi = 0.0;    // min over |A| = m of n^-1 sum_{i in A, j not in A} nu_ij
  double kappa = 0.0;  // min over all subsets of n(n-1) nu(A,A^c) / (|A|(n-|A|))
  std::vector<AgentId> argmin_subset;
};

/// nu(A, A^c) with the n^-1 normalization.
double flow(const Geometry& g, std::span<const AgentId> subset);

/// phi(m) for every m = 1..n-1 by exhaustive enumeration (n <= 22).
/// Element m-1 describes subsets of size m; kappa is filled on each entry.
std::vector<BottleneckReport> bottleneck_profile(const Geometry& g);
BottleneckReport bottleneck(const Geometry& g, std::size_t m);

/// kappa by direct minimization over subsets (independent of the profile).
double kappa(const Geometry& g);

// ---- serialization -------------------------------------------------------------

std::string to_json(const Geometry& g);
Geometry geometry_from_json(const std::string& text);
void save_geometry(const Geometry& g, const std::string& path);
Geometry load_geometry(const std::string& path);

}  // namespace fmie
