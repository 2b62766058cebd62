#include "fmie/stats.hpp"

#include <algorithm>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "fmie/error.hpp"

namespace fmie {

void RunningStats::merge(const RunningStats& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double total = static_cast<double>(count_ + other.count_);
  const double delta = other.mean_ - mean_;
  mean_ += delta * static_cast<double>(other.count_) / total;
  m2_ += other.m2_ + delta * delta * static_cast<double>(count_) *
                         static_cast<double>(other.count_) / total;
  count_ += other.count_;
}

SummaryStats summarize(const RunningStats& stats) {
  SummaryStats s;
  s.count = stats.count();
  s.mean = stats.mean();
  s.variance = stats.variance();
  s.standard_error = stats.standard_error();
  s.ci_low = s.mean - 1.96 * s.standard_error;
  s.ci_high = s.mean + 1.96 * s.standard_error;
  return s;
}

SummaryStats summarize(std::span<const double> sample) {
  RunningStats stats;
  for (double x : sample) stats.add(x);
  return summarize(stats);
}

bool within_joint_sigma(const SummaryStats& a, const SummaryStats& b, double sigmas) {
  const double se = std::hypot(a.standard_error, b.standard_error);
  return std::abs(a.mean - b.mean) <= sigmas * se;
}

Ecdf::Ecdf(std::vector<double> sample) : values_(std::move(sample)) {
  std::sort(values_.begin(), values_.end());
}

double Ecdf::operator()(double x) const {
  if (values_.empty()) return 0.0;
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;  // series converges slowly; Q is 1 to double precision here
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_critical(double alpha, double effective_size) {
  // Invert the Kolmogorov survival function by bisection.
  double lo = 0.2;
  double hi = 5.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_survival(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) / std::sqrt(effective_size);
}

KsResult ks_test(const Ecdf& sample, const Cdf& reference, double alpha) {
  const auto& v = sample.values();
  const double n = static_cast<double>(v.size());
  if (v.empty()) throw InvalidArgument("KS test needs a nonempty sample");
  double d = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double f = reference(v[k]);
    d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
  }
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_survival(d * std::sqrt(n));
  r.critical = ks_critical(alpha, n);
  r.pass = d <= r.critical;
  return r;
}

KsResult ks_test(const Ecdf& a, const Ecdf& b, double alpha) {
  const auto& x = a.values();
  const auto& y = b.values();
  if (x.empty() || y.empty()) throw InvalidArgument("KS test needs nonempty samples");
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  const double effective = nx * ny / (nx + ny);
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_survival(d * std::sqrt(effective));
  r.critical = ks_critical(alpha, effective);
  r.pass = d <= r.critical;
  return r;
}

namespace {

double chi_squared_survival(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

}  // namespace

ChiSquaredResult chi_squared_gof(std::span<const double> observed,
                                 std::span<const double> probabilities, double min_expected) {
  if (observed.size() != probabilities.size()) {
    throw InvalidArgument("chi-squared: observed and probabilities differ in length");
  }
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  // Pool small cells in order of increasing expected count.
  std::vector<std::size_t> order(observed.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return probabilities[a] < probabilities[b]; });
  std::vector<std::pair<double, double>> cells;  // (observed, expected)
  double pooled_obs = 0.0;
  double pooled_exp = 0.0;
  for (auto k : order) {
    pooled_obs += observed[k];
    pooled_exp += probabilities[k] * total;
    if (pooled_exp >= min_expected) {
      cells.emplace_back(pooled_obs, pooled_exp);
      pooled_obs = pooled_exp = 0.0;
    }
  }
  if (pooled_exp > 0.0 || pooled_obs > 0.0) {
    if (cells.empty()) {
      cells.emplace_back(pooled_obs, pooled_exp);
    } else {
      cells.back().first += pooled_obs;
      cells.back().second += pooled_exp;
    }
  }
  ChiSquaredResult r;
  for (const auto& [o, e] : cells) {
    if (e > 0.0) r.statistic += (o - e) * (o - e) / e;
  }
  r.dof = static_cast<double>(cells.size()) - 1.0;
  r.p_value = chi_squared_survival(r.statistic, r.dof);
  return r;
}

ChiSquaredResult chi_squared_two_sample(std::span<const double> a, std::span<const double> b,
                                        double min_expected) {
  if (a.size() != b.size()) throw InvalidArgument("chi-squared: category counts differ");
  const double na = std::accumulate(a.begin(), a.end(), 0.0);
  const double nb = std::accumulate(b.begin(), b.end(), 0.0);
  const double total = na + nb;
  std::vector<std::size_t> order(a.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a[x] + b[x] < a[y] + b[y]; });
  std::vector<std::pair<double, double>> cells;
  double pa = 0.0;
  double pb = 0.0;
  for (auto k : order) {
    pa += a[k];
    pb += b[k];
    const double expected_min = std::min(na, nb) * (pa + pb) / total;
    if (expected_min >= min_expected) {
      cells.emplace_back(pa, pb);
      pa = pb = 0.0;
    }
  }
  if (pa + pb > 0.0) {
    if (cells.empty()) {
      cells.emplace_back(pa, pb);
    } else {
      cells.back().first += pa;
      cells.back().second += pb;
    }
  }
  ChiSquaredResult r;
  for (const auto& [ca, cb] : cells) {
    const double row = ca + cb;
    const double ea = row * na / total;
    const double eb = row * nb / total;
    if (ea > 0.0) r.statistic += (ca - ea) * (ca - ea) / ea;
    if (eb > 0.0) r.statistic += (cb - eb) * (cb - eb) / eb;
  }
  r.dof = static_cast<double>(cells.size()) - 1.0;
  r.p_value = chi_squared_survival(r.statistic, r.dof);
  return r;
}

namespace {

std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t k = 0; k < order.size();) {
    std::size_t end = k;
    while (end + 1 < order.size() && x[order[end + 1]] == x[order[k]]) ++end;
    const double avg = 0.5 * static_cast<double>(k + end) + 1.0;
    for (std::size_t m = k; m <= end; ++m) r[order[m]] = avg;
    k = end + 1;
  }
  return r;
}

}  // namespace

RankCorrelation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw InvalidArgument("spearman needs paired samples");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
  const double my = mx;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < rx.size(); ++k) {
    sxy += (rx[k] - mx) * (ry[k] - my);
    sxx += (rx[k] - mx) * (rx[k] - mx);
    syy += (ry[k] - my) * (ry[k] - my);
  }
  RankCorrelation r;
  r.rho = sxy / std::sqrt(sxx * syy);
  const double z = r.rho * std::sqrt(static_cast<double>(x.size()) - 1.0);
  r.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
  return r;
}

double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

double logistic_cdf(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double logistic_inverse(double u) { return std::log(u / (1.0 - u)); }

double exponential_cdf(double x, double rate) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }

double log_gamma_cdf(double x, double k) { return boost::math::gamma_p(k, std::exp(x)); }

GumbelConvolution::GumbelConvolution(double step, double lo, double hi) : step_(step), lo_(lo) {
  // P(G1 + G2 <= x) = integral of gumbel_pdf(y) * gumbel_cdf(x - y) dy. The
  // integrand is smooth and decays doubly exponentially, so the trapezoid
  // rule on a 10x coarser y-grid is accurate to ~1e-9. Keeping y on a
  // multiple of the output step lets gumbel_cdf(x - y) come from one table.
  if (!(step > 0.0) || !(hi > lo)) throw InvalidArgument("GumbelConvolution: bad grid");
  constexpr long kStride = 10;
  const double ylo = -5.0;
  const double yhi = 40.0;
  const long count = std::lround((hi - lo) / step) + 1;
  const long ycount = std::lround((yhi - ylo) / (step * kStride)) + 1;
  // x - y = lo - ylo + step * (k - kStride * m); index the table by k - kStride * m.
  const long offset_min = -kStride * (ycount - 1);
  const long offset_max = count - 1;
  std::vector<double> table(static_cast<std::size_t>(offset_max - offset_min + 1));
  for (long d = offset_min; d <= offset_max; ++d) {
    table[static_cast<std::size_t>(d - offset_min)] =
        gumbel_cdf(lo - ylo + step * static_cast<double>(d));
  }
  std::vector<double> weights(static_cast<std::size_t>(ycount));
  for (long m = 0; m < ycount; ++m) {
    const double y = ylo + step * kStride * static_cast<double>(m);
    const double w = std::exp(-y - std::exp(-y)) * step * kStride;
    weights[static_cast<std::size_t>(m)] = (m == 0 || m + 1 == ycount) ? 0.5 * w : w;
  }
  cdf_.resize(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    double sum = 0.0;
    for (long m = 0; m < ycount; ++m) {
      sum += weights[static_cast<std::size_t>(m)] *
             table[static_cast<std::size_t>(k - kStride * m - offset_min)];
    }
    cdf_[static_cast<std::size_t>(k)] = std::clamp(sum, 0.0, 1.0);
  }
}

double GumbelConvolution::operator()(double x) const {
  const double pos = (x - lo_) / step_;
  if (pos <= 0.0) return cdf_.front();
  if (pos >= static_cast<double>(cdf_.size() - 1)) return cdf_.back();
  const auto k = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(k);
  return cdf_[k] * (1.0 - frac) + cdf_[k + 1] * frac;
}

double harmonic(std::size_t m) {
  double sum = 0.0;
  for (std::size_t i = m; i >= 1; --i) sum += 1.0 / static_cast<double>(i);
  return sum;
}

}  // namespace fmie
