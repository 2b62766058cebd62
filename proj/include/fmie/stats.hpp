#pragma once

// Monte Carlo aggregation and the goodness-of-fit tests used by the suites.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fmie {

/// Welford accumulator.
class RunningStats {
 public:
  void add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }
  void merge(const RunningStats& other);

  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
  double standard_error() const {
    return count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance
  double standard_error = 0.0;
  double ci_low = 0.0;   // mean - 1.96 SE
  double ci_high = 0.0;  // mean + 1.96 SE

  bool covers(double value) const { return ci_low <= value && value <= ci_high; }
};

SummaryStats summarize(std::span<const double> sample);
SummaryStats summarize(const RunningStats& stats);

/// |a - b| <= sigmas * sqrt(se_a^2 + se_b^2).
bool within_joint_sigma(const SummaryStats& a, const SummaryStats& b, double sigmas);

/// Empirical distribution function of a sample.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> sample);
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  /// Fraction of the sample <= x (right-continuous).
  double operator()(double x) const;

 private:
  std::vector<double> values_;  // sorted
};

using Cdf = std::function<double(double)>;

struct KsResult {
  double statistic = 0.0;  // sup |F_n - F|
  double p_value = 1.0;    // asymptotic Kolmogorov
  double critical = 0.0;   // asymptotic critical value at alpha
  bool pass = true;        // statistic <= critical
};

/// Kolmogorov survival function Q(x) = 2 sum (-1)^(k-1) exp(-2 k^2 x^2).
double kolmogorov_survival(double x);
/// Asymptotic critical value c(alpha)/sqrt(effective size).
double ks_critical(double alpha, double effective_size);

/// One-sample KS test against a continuous reference CDF.
KsResult ks_test(const Ecdf& sample, const Cdf& reference, double alpha = 0.01);
/// Two-sample KS test.
KsResult ks_test(const Ecdf& a, const Ecdf& b, double alpha = 0.01);

struct ChiSquaredResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

/// Goodness of fit of observed counts to expected probabilities. Cells with
/// expected count below `min_expected` are pooled.
ChiSquaredResult chi_squared_gof(std::span<const double> observed,
                                 std::span<const double> probabilities,
                                 double min_expected = 5.0);
/// Homogeneity of two count vectors over the same categories.
ChiSquaredResult chi_squared_two_sample(std::span<const double> a, std::span<const double> b,
                                        double min_expected = 5.0);

/// Spearman rank correlation and its two-sided normal-approximation p-value.
struct RankCorrelation {
  double rho = 0.0;
  double p_value = 1.0;
};
RankCorrelation spearman(std::span<const double> x, std::span<const double> y);

// ---- reference distributions ---------------------------------------------------

inline constexpr double kEulerGamma = 0.57721566490153286061;

double gumbel_cdf(double x);     // exp(-e^-x)
double logistic_cdf(double x);   // e^x / (1 + e^x)
double logistic_inverse(double u);
double exponential_cdf(double x, double rate);
/// Law of log(Gamma(k,1)) = log(xi_1 + ... + xi_k): P = regularized gamma(k, e^x).
double log_gamma_cdf(double x, double k);

/// CDF of G1 + G2 for independent Gumbels, tabulated by numeric convolution on
/// a uniform grid (default step 1e-3 over [-10, 20]) and linearly
/// interpolated.
class GumbelConvolution {
 public:
  explicit GumbelConvolution(double step = 1e-3, double lo = -10.0, double hi = 20.0);
  double operator()(double x) const;

 private:
  double step_;
  double lo_;
  std::vector<double> cdf_;
};

double harmonic(std::size_t m);  // h_m = sum_{i<=m} 1/i

}  // namespace fmie
