#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fmie/chain.hpp"
#include "fmie/error.hpp"
#include "fmie/rng.hpp"

namespace fmie {

namespace {

class SobolevRatio {
 public:
  explicit SobolevRatio(const Generator& gen) : gen_(gen), f_(gen.n()) {}

  // E(f,f) / L(f) at f = exp(u - max u); +inf when f is numerically constant.
  double operator()(const std::vector<double>& u) {
    const double top = *std::max_element(u.begin(), u.end());
    for (std::size_t k = 0; k < u.size(); ++k) f_[k] = std::exp(u[k] - top);
    const double ent = log_sobolev_entropy(f_);
    if (!(ent > 1e-13)) return std::numeric_limits<double>::infinity();
    return dirichlet_form(gen_, f_) / ent;
  }

 private:
  const Generator& gen_;
  std::vector<double> f_;
};

}  // namespace

double log_sobolev(const Generator& gen, const LogSobolevOptions& options) {
  const std::size_t n = gen.n();
  if (n > kMaxLogSobolevAgents) {
    throw UnsupportedSize("log-Sobolev constant supports n <= " +
                          std::to_string(kMaxLogSobolevAgents));
  }
  if (n < 2) throw InvalidArgument("log-Sobolev constant needs n >= 2");
  const double lambda = spectral_gap(gen);
  double best = lambda / 2.0;

  SobolevRatio ratio(gen);
  Rng rng(StreamKey{options.seed, 0});
  const double scales[] = {0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> u(n), grad(n), trial(n);
  for (int start = 0; start < options.starts; ++start) {
    const double scale = scales[static_cast<std::size_t>(start) % std::size(scales)];
    if (start % 2 == 0) {
      for (auto& v : u) v = scale * (2.0 * rng.uniform() - 1.0);
    } else {
      for (auto& v : u) v = rng.bernoulli(0.5) ? scale : 0.0;
      u[rng.below(n)] += scale;  // never constant
    }
    double value = ratio(u);
    double step = 1.0;
    for (int iter = 0; iter < options.max_iterations && std::isfinite(value); ++iter) {
      constexpr double h = 1e-6;
      double mean_grad = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double keep = u[k];
        u[k] = keep + h;
        const double up = ratio(u);
        u[k] = keep - h;
        const double down = ratio(u);
        u[k] = keep;
        grad[k] = (up - down) / (2.0 * h);
        if (!std::isfinite(grad[k])) grad[k] = 0.0;
        mean_grad += grad[k];
      }
      // Project out the invariant direction u -> u + c.
      mean_grad /= static_cast<double>(n);
      double norm2 = 0.0;
      for (auto& gk : grad) {
        gk -= mean_grad;
        norm2 += gk * gk;
      }
      if (norm2 < 1e-24) break;
      double next = value;
      bool moved = false;
      for (int halving = 0; halving < 60; ++halving) {
        for (std::size_t k = 0; k < n; ++k) trial[k] = u[k] - step * grad[k];
        next = ratio(trial);
        if (next <= value - 1e-4 * step * norm2) {
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      const double improvement = value - next;
      u.swap(trial);
      value = next;
      step *= 2.0;
      if (improvement <= options.tolerance * std::max(1.0, std::abs(value))) break;
    }
    if (std::isfinite(value)) best = std::min(best, value);
  }
  return best;
}

}  // namespace fmie
