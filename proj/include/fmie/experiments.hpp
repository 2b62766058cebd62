#pragma once

// Replica harness and the test batteries that check the FMIE identities,
// bounds and limit laws by simulation.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmie/error.hpp"
#include "fmie/geometry.hpp"
#include "fmie/parallel.hpp"
#include "fmie/rng.hpp"
#include "fmie/stats.hpp"

namespace fmie {

// ---- reports ------------------------------------------------------------------------

enum class CheckKind { Identity, Bound, Ks, Exploratory };

std::string_view to_string(CheckKind kind);

struct Check {
  std::string name;
  CheckKind kind = CheckKind::Identity;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Two-sided: |mean - target| <= sigmas * SE.
Check identity_check(std::string name, const SummaryStats& s, double target, double sigmas = 3.0);
/// Two-sided: |a - b| <= sigmas * joint SE.
Check joint_check(std::string name, const SummaryStats& a, const SummaryStats& b,
                  double sigmas = 3.0);
/// One-sided upper bound: mean - sigmas * SE <= bound.
Check upper_bound_check(std::string name, const SummaryStats& s, double bound,
                        double sigmas = 3.0);
Check ks_check(std::string name, const KsResult& r);
Check exact_check(std::string name, double value, double target, double tolerance);

inline constexpr int kReportSchemaVersion = 1;

struct SuiteReport {
  std::string suite;
  nlohmann::json params = nlohmann::json::object();
  std::vector<Check> checks;
  /// Named curves, each an array of [x, y] pairs.
  nlohmann::json series = nlohmann::json::object();

  /// All non-exploratory checks pass.
  bool passed() const;
  const Check* find(std::string_view name) const;
  nlohmann::json to_json() const;
  /// Flat CSV: suite,name,kind,value,target,tolerance,pass.
  void write_csv(std::ostream& out) const;
};

// ---- Monte Carlo harness -------------------------------------------------------------

struct McResult {
  SummaryStats stats;
  std::vector<double> sample;  // by replica index
};

/// Evaluates statistic(replica_key(master_seed, r)) for r < replicas in
/// parallel and summarizes. Deterministic given master_seed.
template <class Statistic>
McResult monte_carlo(std::size_t replicas, std::uint64_t master_seed, Statistic&& statistic,
                     unsigned threads = 0) {
  if (replicas < 2) throw InvalidArgument("monte_carlo needs at least 2 replicas");
  McResult out;
  out.sample = replica_map(
      replicas,
      [&](std::size_t r) { return static_cast<double>(statistic(replica_key(master_seed, r))); },
      threads);
  out.stats = summarize(out.sample);
  return out;
}

// ---- suites --------------------------------------------------------------------------

struct PandemicLimitOptions {
  std::size_t n = 1000;
  std::size_t replicas = 2000;
  std::uint64_t seed = 1;
  double alpha = 0.01;
  /// Limit-law checks (Gumbel, convolution, logistic alignment); default n >= 1000.
  std::optional<bool> limit_tests;
  /// Check increments are Exponential(k(n-k)/(n-1)) and uncorrelated.
  bool increment_tests = true;
  double curve_halfwidth = 4.0;
  double curve_step = 0.05;
  double curve_gap_tolerance = 0.05;
};

SuiteReport pandemic_limit_suite(const PandemicLimitOptions& options);

struct AveragingSuiteOptions {
  Geometry geometry = build_complete(2);
  std::vector<double> x0;  // empty: point mass at agent 0
  std::size_t replicas = 5000;
  std::uint64_t seed = 1;
  std::vector<double> times{0.5, 1.0, 2.0};
  bool mean_identity = true;
  bool l2_bound = true;
  bool dirichlet_integral = true;
  bool entropy = true;
  /// Pennies duality E[X_i X_j] = P(Z1 = i, Z2 = j) at this time (point-mass x0 only).
  std::optional<double> duality_time;
};

SuiteReport averaging_suite(const AveragingSuiteOptions& options);

struct VoterSuiteOptions {
  Geometry geometry = build_complete(5);
  std::size_t replicas = 2000;
  std::uint64_t seed = 1;
  std::vector<double> times{0.0, 1.0, 2.0};
  /// Voter/coalescing partition duality at this time (n <= 10).
  std::optional<double> duality_time;
  std::vector<double> survival_times{1.0, 2.0, 4.0};
  bool bottleneck_bound = true;
};

SuiteReport voter_suite(const VoterSuiteOptions& options);

struct DeferenceFashionistaOptions {
  std::size_t n = 1000;
  std::vector<std::size_t> ks{1, 2, 3};
  std::size_t replicas = 1000;
  std::uint64_t seed = 1;
  double alpha = 0.01;
  bool deference = true;

  bool fashionista = true;
  std::size_t fashion_n = 2000;
  std::vector<double> lambdas{4.0, 8.0, 16.0, 32.0};
  std::size_t fashion_replicas = 16;
  double burn_in = 40.0;
  double window = 30.0;      // each of the two stationarity windows
  double sample_step = 0.5;  // spacing of diversity samples
  double slope_target = -1.0;
  double slope_tolerance = 0.15;

  bool torus_scan = false;  // exploratory
  std::vector<std::size_t> torus_sides{32, 64, 128};
  double torus_lambda = 8.0;
  std::size_t torus_replicas = 4;
};

SuiteReport deference_fashionista_suite(const DeferenceFashionistaOptions& options);

// ---- window profile ----------------------------------------------------------------------

struct WindowProfileOptions {
  double left = -20.0;
  double right = 10.0;
  double step = 1e-3;
  double tolerance = 1e-9;
  int max_iterations = 100;
};

struct WindowProfile {
  double left = 0.0;
  double step = 0.0;
  std::vector<double> values;  // F on the grid left + k * step
  int iterations = 0;
  double last_change = 0.0;  // sup-change of the final iteration

  double time(std::size_t k) const { return left + step * static_cast<double>(k); }
  /// Linear interpolation; 0 / 1 beyond the grid.
  double operator()(double t) const;
};

/// Solves 1 - F(t) = exp(-integral_{-inf}^t F(s) (t - s)^2 ds) with F(0) = 1/2.
/// Throws NumericError (carrying the last sup-change) on non-convergence.
WindowProfile solve_window_profile(const WindowProfileOptions& options = {});

/// sup over grid points (every `stride`-th) of |1 - F - exp(-I)|, with I from
/// Simpson quadrature of the solved profile.
double window_profile_residual(const WindowProfile& profile, std::size_t stride = 10);

SuiteReport window_profile_suite(const WindowProfileOptions& options);

// ---- FPP concentration ---------------------------------------------------------------------

inline constexpr std::size_t kMaxWllnAgents = 400;

struct WllnResult {
  double median_time = 0.0;      // t: median of all pair distances
  double failing_fraction = 0.0; // fraction of pairs with P(T notin (1 +- eps) t) > eps
  double mean_outside = 0.0;     // P(T notin (1 +- eps) t) averaged over pairs
  double mean_max_edge_ratio = 0.0;  // E max edge on geodesic / T
  std::size_t pairs = 0;
};

WllnResult wlln_concentration(const Geometry& g, double epsilon, std::size_t replicas,
                              std::uint64_t seed);

SuiteReport wlln_suite(const Geometry& g, double epsilon, std::size_t replicas,
                       std::uint64_t seed, std::optional<double> max_failing_fraction,
                       std::optional<double> min_failing_fraction);

}  // namespace fmie
