#pragma once

// Exact linear algebra for the associated Markov chain (transition rates
// nu_ij, uniform stationary distribution).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fmie/geometry.hpp"

namespace fmie {

using Matrix = Eigen::MatrixXd;
using Configuration = std::vector<double>;

inline constexpr std::size_t kMaxDenseAgents = 2000;
inline constexpr std::size_t kMaxLogSobolevAgents = 12;
inline constexpr std::size_t kMaxMeetingAgents = 60;

/// N_ij = nu_ij off the diagonal, N_ii = -sum_j nu_ij. Symmetric, rows sum to 0.
struct Generator {
  Matrix matrix;
  std::size_t n() const { return static_cast<std::size_t>(matrix.rows()); }
};

Generator generator(const Geometry& g);

/// Orthogonal diagonalization N = V diag(mu) V^T, eigenvalues ascending
/// (most negative first, the zero eigenvalue last).
class Spectrum {
 public:
  explicit Spectrum(const Generator& gen);

  const Eigen::VectorXd& eigenvalues() const { return values_; }
  const Matrix& eigenvectors() const { return vectors_; }

  /// -(second largest eigenvalue).
  double gap() const;

  /// p(t) = exp(tN); rows renormalized to 1 and entries clipped to [0,1].
  Matrix kernel(double t) const;

 private:
  Eigen::VectorXd values_;
  Matrix vectors_;
};

Matrix transition_kernel(const Generator& gen, double t);
double spectral_gap(const Generator& gen);

struct LogSobolevOptions {
  int starts = 64;
  double tolerance = 1e-9;
  int max_iterations = 4000;
  std::uint64_t seed = 0x5eed;
};

/// alpha = inf over non-constant f of E(f,f) / L(f), with
/// L(f) = n^-1 sum f_i^2 log(f_i^2 / ||f||_2^2). Multi-start projected
/// gradient descent over f = exp(u); the near-constant limit lambda/2 is
/// always included in the infimum. n <= 12.
double log_sobolev(const Generator& gen, const LogSobolevOptions& options = {});

struct SpectralReport {
  double lambda = 0.0;
  std::optional<double> alpha;
  std::vector<double> eigenvalues;  // descending: 0 first
};

SpectralReport spectral_report(const Generator& gen, bool with_log_sobolev);

// ---- functionals of configurations (uniform measure on agents) -------------

double average(std::span<const double> f);
double l2_norm(std::span<const double> f);  // sqrt(n^-1 sum f_i^2)
double variance(std::span<const double> f);  // ||f||_2^2 - average^2
/// n^-1 sum over unordered pairs (f_i - f_j)^2 nu_ij.
double dirichlet_form(const Geometry& g, std::span<const double> f);
double dirichlet_form(const Generator& gen, std::span<const double> f);
/// -sum x_i log x_i with 0 log 0 = 0. Throws on negative entries.
double entropy(std::span<const double> x);
/// The entropy functional in the log-Sobolev ratio.
double log_sobolev_entropy(std::span<const double> f);

// ---- hitting and meeting times ----------------------------------------------

struct HittingTimes {
  Matrix mean;  // mean(i, j) = E_i T_j
  double condition = 1.0;
  bool ill_conditioned = false;  // condition > 1e12
};

/// Solved through the fundamental matrix Z = (Pi - N)^-1 - Pi:
/// E_i T_j = n (Z_jj - Z_ij).
HittingTimes hitting_times(const Generator& gen);
double tau_star(const Generator& gen);

enum class Speed { Half, Full };

/// E T^meet_ij for two independent copies moving at rates nu (Full) or nu/2
/// (Half), by a sparse solve over unordered pairs. n <= 60.
Matrix meeting_times(const Generator& gen, Speed speed);

/// Mean time for Kingman's coalescent (rates k choose 2) to go from m
/// lineages to one: 2(1 - 1/m).
double kingman_mean(std::size_t m);

/// Row-major CSV, 17 significant digits.
void write_matrix_csv(const Matrix& m, std::ostream& out);

}  // namespace fmie
