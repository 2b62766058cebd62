#include <algorithm>
#include <cmath>
#include <limits>

#include "fmie/error.hpp"
#include "fmie/experiments.hpp"

namespace fmie {

namespace {

// Below the grid the profile follows its left-tail asymptote eps * e^{a s},
// a = 2^(1/3), which solves the linearized equation F(t) = int F(s)(t-s)^2 ds.
const double kTailRate = std::cbrt(2.0);

/// int_{-inf}^{L} eps e^{a s} (t - s)^2 ds, with u = t - L >= 0.
double tail_integral(double eps_at_left, double u) {
  const double a = kTailRate;
  return eps_at_left * (u * u / a + 2.0 * u / (a * a) + 2.0 / (a * a * a));
}

/// Marches the Volterra form of the equation across the grid. The kernel
/// (t - s)^2 vanishes at s = t, so each value only needs earlier ones. The
/// trapezoid sum is kept as running moments of F in u = s - left.
std::vector<double> march(double left, double step, std::size_t count, double eps) {
  std::vector<double> f(count);
  const double seed = eps * std::exp(kTailRate * left);
  long double a0 = 0.0L;
  long double a1 = 0.0L;
  long double a2 = 0.0L;
  for (std::size_t k = 0; k < count; ++k) {
    const long double u = static_cast<long double>(step) * static_cast<long double>(k);
    const long double quad = static_cast<long double>(step) * (u * u * a0 - 2.0L * u * a1 + a2);
    const double integral = tail_integral(seed, static_cast<double>(u)) + static_cast<double>(quad);
    f[k] = -std::expm1(-integral);
    const long double w = k == 0 ? 0.5L : 1.0L;
    a0 += w * f[k];
    a1 += w * f[k] * u;
    a2 += w * f[k] * u * u;
  }
  return f;
}

/// First grid crossing of 1/2, linearly interpolated.
double half_crossing(const std::vector<double>& f, double left, double step) {
  for (std::size_t k = 1; k < f.size(); ++k) {
    if (f[k] >= 0.5) {
      const double frac = (0.5 - f[k - 1]) / (f[k] - f[k - 1]);
      return left + step * (static_cast<double>(k - 1) + frac);
    }
  }
  throw NumericError("window profile never reaches 1/2 on the grid", 1.0);
}

}  // namespace

double WindowProfile::operator()(double t) const {
  const double pos = (t - left) / step;
  if (pos <= 0.0) return pos < 0.0 ? 0.0 : values.front();
  if (pos >= static_cast<double>(values.size() - 1)) return 1.0;
  const auto k = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(k);
  return values[k] * (1.0 - frac) + values[k + 1] * frac;
}

WindowProfile solve_window_profile(const WindowProfileOptions& o) {
  if (!(o.step > 0.0) || !(o.right > 0.0) || !(o.left < 0.0)) {
    throw InvalidArgument("window profile grid must straddle 0 with a positive step");
  }
  double left = o.left;
  double right = o.right;
  for (int widen = 0; widen < 8; ++widen) {
    const auto count = static_cast<std::size_t>(std::llround((right - left) / o.step)) + 1;
    double eps = 1.0;
    std::vector<double> prev;
    WindowProfile out;
    out.left = left;
    out.step = o.step;
    bool converged = false;
    for (int it = 1; it <= o.max_iterations; ++it) {
      auto f = march(left, o.step, count, eps);
      const double shift = half_crossing(f, left, o.step);
      eps *= std::exp(kTailRate * shift);
      double change = std::numeric_limits<double>::infinity();
      if (!prev.empty()) {
        change = 0.0;
        for (std::size_t k = 0; k < count; ++k) change = std::max(change, std::abs(f[k] - prev[k]));
      }
      prev = std::move(f);
      out.iterations = it;
      out.last_change = change;
      if (change < o.tolerance && std::abs(shift) < o.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NumericError("window profile iteration did not converge", out.last_change);
    }
    out.values = std::move(prev);
    const bool left_ok = out.values.front() < 1e-6;
    const bool right_ok = out.values.back() > 1.0 - 1e-6;
    if (left_ok && right_ok) return out;
    if (!left_ok) left -= 10.0;
    if (!right_ok) right += 5.0;
  }
  throw NumericError("window profile grid could not be widened enough", 1.0);
}

double window_profile_residual(const WindowProfile& p, std::size_t stride) {
  const auto& f = p.values;
  const double h = p.step;
  const double seed = f.front();  // eps e^{a left}
  double worst = 0.0;
  for (std::size_t k = 0; k < f.size(); k += std::max<std::size_t>(stride, 1)) {
    const double t = p.time(k);
    auto g = [&](std::size_t m) {
      const double d = t - p.time(m);
      return f[m] * d * d;
    };
    double integral = tail_integral(seed, t - p.left);
    if (k == 1) {
      integral += 0.5 * h * (g(0) + g(1));
    } else if (k >= 2) {
      // Composite Simpson over an even number of intervals, 3/8 rule on the
      // last three when k is odd.
      const std::size_t even = (k % 2 == 0) ? k : k - 3;
      double s = g(0) + g(even);
      for (std::size_t m = 1; m < even; ++m) s += (m % 2 == 1 ? 4.0 : 2.0) * g(m);
      integral += s * h / 3.0;
      if (even != k) {
        integral += 3.0 * h / 8.0 * (g(k - 3) + 3.0 * g(k - 2) + 3.0 * g(k - 1) + g(k));
      }
    }
    worst = std::max(worst, std::abs(1.0 - f[k] - std::exp(-integral)));
  }
  return worst;
}

SuiteReport window_profile_suite(const WindowProfileOptions& o) {
  SuiteReport rep;
  rep.suite = "window-profile";
  rep.params = {{"left", o.left}, {"right", o.right}, {"step", o.step}, {"tolerance", o.tolerance}};
  const auto p = solve_window_profile(o);
  const double limit = 10.0 * o.tolerance;
  rep.params["iterations"] = p.iterations;

  const double residual = window_profile_residual(p);
  rep.checks.push_back(Check{"residual", CheckKind::Bound, residual, limit, limit, residual < limit});

  std::size_t decreases = 0;
  for (std::size_t k = 1; k < p.values.size(); ++k) decreases += p.values[k] < p.values[k - 1];
  rep.checks.push_back(exact_check("monotone_violations", static_cast<double>(decreases), 0.0, 0.0));
  rep.checks.push_back(Check{"left_boundary", CheckKind::Bound, p.values.front(), 0.0, 1e-6,
                             p.values.front() < 1e-6});
  rep.checks.push_back(Check{"right_boundary", CheckKind::Bound, 1.0 - p.values.back(), 0.0, 1e-6,
                             1.0 - p.values.back() < 1e-6});
  rep.checks.push_back(exact_check("gauge_half_at_zero", p(0.0), 0.5, limit));

  WindowProfileOptions fine = o;
  fine.step = o.step / 2.0;
  fine.left = p.left;
  fine.right = p.time(p.values.size() - 1);
  const auto q = solve_window_profile(fine);
  double diff = 0.0;
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    diff = std::max(diff, std::abs(p.values[k] - q(p.time(k))));
  }
  rep.checks.push_back(Check{"grid_refinement", CheckKind::Bound, diff, limit, limit, diff < limit});

  auto& series = rep.series["profile"] = nlohmann::json::array();
  for (double t = std::ceil(p.left); t <= p.time(p.values.size() - 1) + 1e-9; t += 0.5) {
    series.push_back({t, p(t)});
  }
  return rep;
}

}  // namespace fmie
