#include <doctest.h>

#include <cmath>

#include <boost/math/special_functions/bessel.hpp>

#include "fmie/experiments.hpp"
#include "fmie/rng.hpp"
#include "fmie/stats.hpp"

using namespace fmie;

namespace {

double gumbel_draw(Rng& r) { return -std::log(-std::log(r.uniform_open())); }

}  // namespace

TEST_CASE("running and summary statistics") {
  const double xs[] = {1, 2, 3, 4, 10};
  const auto s = summarize(xs);
  CHECK(s.count == 5);
  CHECK(s.mean == doctest::Approx(4.0));
  CHECK(s.variance == doctest::Approx(12.5));
  CHECK(s.standard_error == doctest::Approx(std::sqrt(12.5 / 5)));
  CHECK(s.ci_low == doctest::Approx(4.0 - 1.96 * s.standard_error));
  CHECK(s.covers(4.0));
  RunningStats a, b, all;
  for (int k = 0; k < 10; ++k) (k < 4 ? a : b).add(k * k), all.add(k * k);
  a.merge(b);
  CHECK(a.mean() == doctest::Approx(all.mean()));
  CHECK(a.variance() == doctest::Approx(all.variance()));
  const double same[] = {3, 3, 3};
  CHECK(summarize(same).variance == 0.0);
}

TEST_CASE("monte carlo harness") {
  auto constant = monte_carlo(10, 1, [](StreamKey) { return 2.0; });
  CHECK(constant.stats.variance == 0.0);
  CHECK_THROWS_AS(monte_carlo(1, 1, [](StreamKey) { return 0.0; }), InvalidArgument);

  auto expo = [](StreamKey k) { return Rng(k).exponential(1.0); };
  int covered = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) covered += monte_carlo(1000, 500 + trial, expo).stats.covers(1.0);
  CHECK(covered >= 93);

  const auto small = monte_carlo(2000, 7, expo), big = monte_carlo(4000, 8, expo);
  const double ratio = small.stats.standard_error * small.stats.standard_error /
                       (big.stats.standard_error * big.stats.standard_error);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.15));

  // Same seed, different thread counts: identical samples.
  const auto one = monte_carlo(64, 9, expo, 1), four = monte_carlo(64, 9, expo, 4);
  CHECK(one.sample == four.sample);
}

TEST_CASE("ecdf") {
  Ecdf e({3.0, 1.0, 2.0, 2.0});
  CHECK(e(0.5) == 0.0);
  CHECK(e(1.0) == 0.25);
  CHECK(e(2.0) == 0.75);
  CHECK(e(2.5) == 0.75);
  CHECK(e(3.0) == 1.0);
}

TEST_CASE("KS critical values and self-consistency") {
  CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(ks_critical(0.01, 100) == doctest::Approx(0.16276).epsilon(1e-3));

  int passes = 0;
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    Rng r(StreamKey{77, trial});
    std::vector<double> x(500);
    for (auto& v : x) v = gumbel_draw(r);
    passes += ks_test(Ecdf(x), gumbel_cdf, 0.01).pass;
  }
  CHECK(passes >= 196);

  Rng r(StreamKey{78, 0});
  std::vector<double> g(10000), l(10000), shifted(2000);
  for (auto& v : g) v = gumbel_draw(r);
  for (auto& v : l) v = logistic_inverse(r.uniform_open());
  for (auto& v : shifted) v = gumbel_draw(r) + 0.3;
  const auto sg = summarize(g), sl = summarize(l);
  CHECK(std::abs(sg.mean - kEulerGamma) < 3 * sg.standard_error);
  CHECK(std::abs(sl.mean) < 3 * sl.standard_error);
  CHECK(ks_test(Ecdf(l), logistic_cdf, 0.01).pass);
  CHECK(!ks_test(Ecdf(shifted), gumbel_cdf, 0.01).pass);
  CHECK(!ks_test(Ecdf(shifted), Ecdf(std::vector<double>(g.begin(), g.begin() + 2000)), 0.01).pass);
}

TEST_CASE("reference distributions") {
  CHECK(gumbel_cdf(0.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(logistic_cdf(0.0) == 0.5);
  CHECK(logistic_cdf(logistic_inverse(0.3)) == doctest::Approx(0.3));
  CHECK(exponential_cdf(std::log(2.0) / 3, 3.0) == doctest::Approx(0.5));
  CHECK(exponential_cdf(-1.0, 1.0) == 0.0);
  CHECK(harmonic(1) == 1.0);
  CHECK(harmonic(4) == doctest::Approx(25.0 / 12));

  // log Exp(1): P(log xi <= x) = 1 - exp(-e^x), i.e. -C_1 is Gumbel.
  for (double x : {-3.0, -0.5, 0.0, 1.2}) {
    CHECK(log_gamma_cdf(x, 1) == doctest::Approx(1 - std::exp(-std::exp(x))));
    CHECK(1 - log_gamma_cdf(x, 1) == doctest::Approx(gumbel_cdf(-x)));
  }
  // k = 2 against midpoint quadrature of the Gamma(2,1) density y e^-y.
  for (double x : {-2.0, 0.0, 0.7, 2.0}) {
    const double top = std::exp(x);
    const int steps = 200000;
    double sum = 0;
    for (int i = 0; i < steps; ++i) {
      const double y = (i + 0.5) * top / steps;
      sum += y * std::exp(-y);
    }
    CHECK(log_gamma_cdf(x, 2) == doctest::Approx(sum * top / steps).epsilon(1e-9));
  }
}

TEST_CASE("Gumbel convolution against the Bessel closed form") {
  // P(G1 + G2 <= x) = 2 sqrt(c) K_1(2 sqrt(c)), c = e^-x.
  const GumbelConvolution conv;
  double worst = 0;
  for (double x = -4.0; x <= 15.0; x += 0.137) {
    const double c = std::exp(-x);
    const double z = 2 * std::sqrt(c);
    const double exact = z * boost::math::cyl_bessel_k(1, z);
    worst = std::max(worst, std::abs(conv(x) - exact));
  }
  CHECK(worst < 1e-6);
  CHECK(conv(-50.0) < 1e-100);
  CHECK(std::abs(conv(50.0) - 1.0) < 1e-6);  // held at the grid end
}

TEST_CASE("chi-squared and rank correlation") {
  const double obs[] = {50, 30, 20};
  const double probs[] = {0.5, 0.3, 0.2};
  const auto fit = chi_squared_gof(obs, probs);
  CHECK(fit.statistic == doctest::Approx(0.0));
  CHECK(fit.p_value == doctest::Approx(1.0));
  const double off[] = {70, 20, 10};
  const auto bad = chi_squared_gof(off, probs);
  CHECK(bad.statistic == doctest::Approx(400.0 / 50 + 100.0 / 30 + 100.0 / 20));
  CHECK(bad.dof == 2);
  CHECK(bad.p_value < 1e-3);
  const double a[] = {30, 20, 50}, b[] = {30, 20, 50};
  CHECK(chi_squared_two_sample(a, b).p_value == doctest::Approx(1.0));

  const double x[] = {1, 2, 3, 4, 5}, y[] = {2, 4, 6, 8, 10}, z[] = {5, 4, 3, 2, 1};
  CHECK(spearman(x, y).rho == doctest::Approx(1.0));
  CHECK(spearman(x, z).rho == doctest::Approx(-1.0));
}
