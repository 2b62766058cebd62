#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fmie/chain.hpp"
#include "fmie/error.hpp"
#include "fmie/rng.hpp"

using namespace fmie;

namespace {

std::vector<Geometry> small_geometries() {
  return {build_complete(4), build_cycle(5, 0.5), build_star(5), build_path(4, 1.3),
          build_torus(3, 2),
          Geometry(5, {{0, 1, 1.0}, {1, 2, 0.3}, {2, 3, 2.0}, {3, 4, 0.05}, {0, 4, 0.7}}, "irr")};
}

std::vector<double> random_f(Rng& r, std::size_t n) {
  std::vector<double> f(n);
  for (auto& v : f) v = r.uniform() * 4 - 2;
  return f;
}

// exp(tN) by scaling and squaring of a truncated Taylor series; independent of
// the eigendecomposition used in the library.
Matrix expm_taylor(const Matrix& a, double t) {
  const int squarings = 12;
  Matrix x = a * (t / std::pow(2.0, squarings));
  Matrix term = Matrix::Identity(a.rows(), a.cols()), sum = term;
  for (int k = 1; k < 25; ++k) {
    term = term * x / k;
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

}  // namespace

TEST_CASE("generator structure") {
  const auto k2 = generator(build_complete(2)).matrix;
  CHECK(k2(0, 0) == -1.0);
  CHECK(k2(0, 1) == 1.0);
  const auto k3 = generator(build_complete(3)).matrix;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(k3(i, j) == doctest::Approx(i == j ? -1.0 : 0.5));
  }
  for (const auto& g : small_geometries()) {
    const auto n = generator(g).matrix;
    CHECK((n - n.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(n.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("transition kernel") {
  const auto k2 = generator(build_complete(2));
  for (double t : {0.0, 0.3, 1.0, 2.5}) {
    const auto p = transition_kernel(k2, t);
    CHECK(p(0, 1) == doctest::Approx((1 - std::exp(-2 * t)) / 2).epsilon(1e-12));
  }
  for (const auto& g : small_geometries()) {
    const auto gen = generator(g);
    const auto id = transition_kernel(gen, 0.0);
    CHECK((id - Matrix::Identity(g.n(), g.n())).cwiseAbs().maxCoeff() < 1e-12);
    const auto p1 = transition_kernel(gen, 0.7), p2 = transition_kernel(gen, 1.1);
    const auto p12 = transition_kernel(gen, 1.8);
    CHECK((p1 * p2 - p12).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((p12 - expm_taylor(gen.matrix, 1.8)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((p12.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
    const auto far = transition_kernel(gen, 2000.0);
    CHECK((far.array() - 1.0 / double(g.n())).abs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("spectral gap") {
  CHECK(spectral_gap(generator(build_complete(2))) == doctest::Approx(2.0));
  for (std::size_t n = 3; n <= 8; ++n) {
    CHECK(spectral_gap(generator(build_complete(n))) == doctest::Approx(double(n) / (n - 1)));
  }
  // Rayleigh-quotient minimization oracle: power iteration on (cI + N)
  // restricted to the mean-zero subspace.
  Rng r(StreamKey{2, 2});
  for (const auto& g : small_geometries()) {
    const auto gen = generator(g);
    const double lambda = spectral_gap(gen);
    const auto n = g.n();
    const double c = 2 * gen.matrix.diagonal().cwiseAbs().maxCoeff();
    Matrix shifted = gen.matrix + c * Matrix::Identity(n, n);
    Eigen::VectorXd v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = r.uniform() - 0.5;
    for (int it = 0; it < 20000; ++it) {
      v.array() -= v.mean();
      v = shifted * v;
      v.normalize();
    }
    v.array() -= v.mean();
    const auto f = std::vector<double>(v.data(), v.data() + n);
    const double rayleigh = dirichlet_form(gen, f) / variance(f);
    CHECK(rayleigh == doctest::Approx(lambda).epsilon(1e-8));
    // Inequality form on random functions.
    for (int k = 0; k < 200; ++k) {
      const auto h = random_f(r, n);
      CHECK(lambda * variance(h) <= dirichlet_form(g, h) + 1e-12);
    }
    const Spectrum sp(gen);
    CHECK(sp.eigenvalues().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sp.gap() == doctest::Approx(lambda));
  }
}

TEST_CASE("log-Sobolev constant") {
  Rng r(StreamKey{3, 3});
  for (const auto& g : small_geometries()) {
    const auto gen = generator(g);
    const double alpha = log_sobolev(gen);
    CHECK(alpha > 0);
    CHECK(alpha <= spectral_gap(gen) / 2 + 1e-12);
    for (int k = 0; k < 200; ++k) {
      auto f = random_f(r, g.n());
      for (auto& v : f) v = std::exp(v);
      CHECK(alpha * log_sobolev_entropy(f) <= dirichlet_form(g, f) + 1e-10);
    }
  }
  CHECK_THROWS_AS(log_sobolev(generator(build_complete(13))), UnsupportedSize);
}

TEST_CASE("configuration functionals") {
  const auto k2 = build_complete(2);
  const double point[] = {1.0, 0.0};
  CHECK(dirichlet_form(k2, point) == doctest::Approx(0.5));
  const double flat[] = {0.3, 0.3, 0.3};
  CHECK(dirichlet_form(build_complete(3), flat) == 0.0);
  CHECK(variance(flat) == doctest::Approx(0.0).epsilon(1e-15));
  std::vector<double> uniform(7, 1.0 / 7);
  CHECK(entropy(uniform) == doctest::Approx(std::log(7.0)));
  const double with_zero[] = {0.0, 1.0};
  CHECK(entropy(with_zero) == 0.0);
  const double negative[] = {-0.1, 1.1};
  CHECK_THROWS_AS(entropy(negative), InvalidArgument);
  const double f4[] = {1, 2, 3, 6};
  CHECK(average(f4) == doctest::Approx(3.0));
  CHECK(l2_norm(f4) == doctest::Approx(std::sqrt(50.0 / 4)));
  CHECK(variance(f4) == doctest::Approx(50.0 / 4 - 9.0));

  Rng r(StreamKey{4, 4});
  for (const auto& g : small_geometries()) {
    const auto gen = generator(g);
    for (int k = 0; k < 50; ++k) {
      const auto f = random_f(r, g.n());
      const Eigen::Map<const Eigen::VectorXd> v(f.data(), f.size());
      const double quad = -v.dot(gen.matrix * v) / double(g.n());
      CHECK(dirichlet_form(g, f) == doctest::Approx(quad).epsilon(1e-10));
      CHECK(dirichlet_form(gen, f) == doctest::Approx(quad).epsilon(1e-10));
    }
  }
}

TEST_CASE("hitting and meeting times") {
  const auto k4 = generator(build_complete(4));
  const auto h = hitting_times(k4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(h.mean(i, j) == doctest::Approx(i == j ? 0.0 : 3.0));
  }
  CHECK(tau_star(k4) == doctest::Approx(3.0));

  // Path 0-1-2 at rate 1: h0 = 1 + h1, h1 = 1/2 + h0/2, so E_0 T_2 = 3, E_1 T_2 = 2.
  const auto p3 = hitting_times(generator(build_path(3)));
  CHECK(p3.mean(0, 2) == doctest::Approx(3.0));
  CHECK(p3.mean(1, 2) == doctest::Approx(2.0));
  CHECK(p3.mean(0, 1) == doctest::Approx(1.0));

  for (const auto& g : small_geometries()) {
    const auto gen = generator(g);
    const auto full = meeting_times(gen, Speed::Full), half = meeting_times(gen, Speed::Half);
    CHECK((half - 2 * full).cwiseAbs().maxCoeff() < 1e-9);
    for (std::size_t i = 0; i < g.n(); ++i) CHECK(full(i, i) == 0.0);
  }
  // K2 full speed: the pair meets at rate 2 (either agent may jump).
  CHECK(meeting_times(generator(build_complete(2)), Speed::Full)(0, 1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(meeting_times(generator(build_complete(61)), Speed::Half), UnsupportedSize);
}

TEST_CASE("kingman mean and csv") {
  CHECK(kingman_mean(2) == 1.0);
  CHECK(kingman_mean(1) == 0.0);
  CHECK(std::abs(kingman_mean(1000000) - 2.0) < 1e-5);
  std::ostringstream out;
  write_matrix_csv(transition_kernel(generator(build_complete(2)), 0.0), out);
  CHECK(out.str() == "1,0\n0,1\n");
}
