#pragma once

// Model-level runners built on the update rules: each takes a geometry and an
// event stream and returns the observables the experiments need.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fmie/chain.hpp"
#include "fmie/geometry.hpp"
#include "fmie/meetings.hpp"
#include "fmie/rules.hpp"

namespace fmie {

// ---- Pandemic and first-passage percolation -------------------------------------

struct PandemicRun {
  std::vector<double> infection_time;  // T^pan_{source, a}
  std::vector<double> count_times;     // D(k), k = 1..n (index k-1)
};

/// Runs the epidemic until everyone is infected or the horizon is reached.
PandemicRun pandemic_times(const Geometry& g, AgentId source, EventStream& stream);

struct FppDistances {
  std::size_t n = 0;
  std::vector<double> distance;  // row-major n x n
  std::vector<double> max_edge;  // largest edge length on the chosen geodesic

  double at(AgentId a, AgentId b) const { return distance[a * n + b]; }
  double max_edge_at(AgentId a, AgentId b) const { return max_edge[a * n + b]; }
};

/// Draws xi_e ~ Exponential(nu_e) per edge from the edge-length substream of
/// `key` and returns all-pairs shortest-path distances (Dijkstra from every
/// source).
FppDistances fpp_distances(const Geometry& g, StreamKey key);
inline FppDistances fpp_distances(const Geometry& g, std::uint64_t seed) {
  return fpp_distances(g, StreamKey{seed, 0});
}

// ---- Averaging --------------------------------------------------------------------

struct AveragingSample {
  double t = 0.0;
  std::vector<double> x;
  double norm = 0.0;       // ||x||_2 under the uniform measure
  double dirichlet = 0.0;  // E(x, x)
  std::optional<double> entropy;  // -sum x log x when x0 is a probability vector
};

struct AveragingOptions {
  /// Continue past the last sample time to integrate E(X(t), X(t)) dt.
  bool integrate_dirichlet = true;
  /// Stop integrating once E falls below this fraction of its initial value.
  double dirichlet_cutoff = 1e-16;
  /// Tolerance for the per-event entropy change (rounding).
  double entropy_tolerance = 1e-14;
};

struct AveragingRun {
  std::vector<AveragingSample> samples;
  double dirichlet_integral = 0.0;  // exact: E is constant between events
  bool entropy_monotone = true;
  std::uint64_t entropy_violations = 0;
  std::uint64_t events = 0;
  bool absorbed = false;
};

bool is_probability(std::span<const double> x, double tolerance = 1e-12);

AveragingRun run_averaging(const Geometry& g, std::vector<double> x0, EventStream& stream,
                           std::span<const double> sample_times,
                           const AveragingOptions& options = {});

struct PennySample {
  double t = 0.0;
  AgentId z1 = 0;
  AgentId z2 = 0;
};

std::vector<PennySample> run_coupled_pennies(AgentId i0, AgentId j0, EventStream& stream,
                                             std::span<const double> sample_times);

// ---- Voter and coalescing -------------------------------------------------------

struct VoterRun {
  /// Block sizes (descending) of the opinion partition at each sample time.
  std::vector<std::vector<std::uint32_t>> blocks;
  /// Same-opinion fraction of positive-rate edges at each sample time.
  std::vector<double> concordance;
  double consensus_time = kForever;  // T^voter
};

VoterRun run_voter(const Geometry& g, EventStream& stream, std::span<const double> sample_times);

struct VoterTwoRun {
  std::vector<std::pair<double, std::uint32_t>> count_path;  // (t, X(t)) at each change
  double hit_time = kForever;  // first time X hits 0 or n
  std::uint32_t final_count = 0;
};

/// Two opinions; agents 0..k-1 hold the first. X(t) counts first-opinion agents.
VoterTwoRun run_voter_two(const Geometry& g, std::uint32_t k, EventStream& stream);

struct CoalescingRun {
  std::vector<std::vector<std::uint32_t>> blocks;  // cluster sizes per sample, descending
  std::vector<std::pair<double, std::size_t>> count_path;
  double coalescence_time = kForever;  // T^coal
  std::vector<double> first_meeting;   // n x n, only if requested
};

CoalescingRun run_coalescing(const Geometry& g, EventStream& stream,
                             std::span<const double> sample_times, bool track_meetings = false);

/// Q = sum over opinions of (|V| / n)^2.
double q_statistic(std::span<const std::uint32_t> block_sizes, std::size_t n);
/// -sum (|V| / n) log(|V| / n).
double partition_entropy(std::span<const std::uint32_t> block_sizes, std::size_t n);

/// Meeting time of two independent half-speed chains started at a and b,
/// each driven by its own stream.
double sample_meeting_time(AgentId a, AgentId b, EventStream& first, EventStream& second);

struct DualityReport {
  double t = 0.0;
  std::size_t replicas = 0;
  double chi_squared = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  /// Survival P(T > s) for voter and coalescing at the requested s values.
  std::vector<double> survival_times;
  std::vector<double> voter_survival;
  std::vector<double> coalescing_survival;
  std::vector<double> survival_se;  // joint standard error of the difference
  bool survival_agree = true;       // all within 3 joint SE
};

/// Compares the block-size multiset distribution of V(t) and C(t) (chi-squared
/// homogeneity) and the survival functions of T^voter and T^coal. n <= 10.
DualityReport voter_coalescing_duality_test(const Geometry& g, double t, std::size_t replicas,
                                            std::uint64_t master_seed,
                                            std::span<const double> survival_times = {});

// ---- Gambler, Interchange, Deference, Fashionista ------------------------------

struct GamblerRun {
  std::vector<double> money;
  double absorption_time = kForever;
  bool absorbed = false;
};

GamblerRun run_gambler(const Geometry& g, std::vector<double> x0, EventStream& stream);

/// True if the agents with positive money form an independent set.
bool is_independent_support(const Geometry& g, std::span<const double> money);

struct InterchangeSample {
  double t = 0.0;
  std::vector<std::uint32_t> token_at;
};

std::vector<InterchangeSample> run_interchange(const Geometry& g, EventStream& stream,
                                               std::span<const double> sample_times);

struct InterchangeGaps {
  double lambda_ip = 0.0;
  double lambda_mc = 0.0;
};

inline constexpr std::size_t kMaxInterchangeAgents = 6;

/// Spectral gap of the n!-state interchange chain against that of the
/// associated chain. n <= 6.
InterchangeGaps interchange_gap_bruteforce(const Geometry& g);

struct DeferenceRun {
  /// shares[s][k] = fraction of agents holding label k (0-based) at sample s,
  /// for k < top_k.
  std::vector<std::vector<double>> shares;
  std::vector<double> label1_times;  // time each agent first holds label 0
};

DeferenceRun run_deference(const Geometry& g, EventStream& stream,
                           std::span<const double> sample_times, std::size_t top_k);

struct FashionistaRun {
  std::vector<double> diversity;  // s at each sample time
  std::vector<std::size_t> live_fashions;
  std::uint64_t originations = 0;
};

/// Merges rate-lambda originations (uniform agent, from the stream's
/// origination substream) into the meeting stream. Sample times are absolute
/// and should lie beyond the burn-in.
FashionistaRun run_fashionista(const Geometry& g, double lambda, EventStream& stream,
                               std::span<const double> sample_times);

// ---- absorption taxonomy and trajectory dumps -------------------------------------

enum class LongRunBehavior { OrderedAbsorbing, DisorderedAbsorbing, Stationary };

std::string_view to_string(LongRunBehavior b);

/// Rule names accepted by `trajectory` and the CLI.
const std::vector<std::string>& rule_names();

/// Long-run class of a named rule.
LongRunBehavior long_run_behavior(std::string_view rule);

struct RuleParams {
  AgentId source = 0;           // pandemic, token, pennies
  AgentId second = 0;           // second penny
  std::uint32_t k = 1;          // voter-two: initial count; deference: top k
  double lambda = 1.0;          // fashionista origination rate
  std::vector<double> x0;       // averaging, gambler (empty: point mass / unit stakes)
};

struct TrajectorySummary {
  std::string rule;
  bool absorbed = false;
  double absorption_time = kForever;
  std::uint64_t events = 0;
  LongRunBehavior behavior = LongRunBehavior::Stationary;
};

inline constexpr int kTrajectorySchemaVersion = 1;

/// Runs a named rule and writes one JSON line per sample time:
/// {"schema":1,"t":...,<rule observables>}. Throws InvalidArgument for an
/// unknown rule or parameters inconsistent with the geometry.
TrajectorySummary trajectory(std::string_view rule, const RuleParams& params, const Geometry& g,
                             EventStream& stream, std::span<const double> sample_times,
                             std::ostream& out);

}  // namespace fmie
