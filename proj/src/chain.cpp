#include "fmie/chain.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "fmie/error.hpp"

namespace fmie {

namespace {

void require_dense(std::size_t n) {
  if (n > kMaxDenseAgents) {
    throw UnsupportedSize("dense chain analytics support n <= " + std::to_string(kMaxDenseAgents));
  }
}

}  // namespace

Generator generator(const Geometry& g) {
  require_dense(g.n());
  const auto n = static_cast<Eigen::Index>(g.n());
  Generator gen{Matrix::Zero(n, n)};
  for (const auto& e : g.edges()) {
    gen.matrix(e.i, e.j) += e.rate;
    gen.matrix(e.j, e.i) += e.rate;
    gen.matrix(e.i, e.i) -= e.rate;
    gen.matrix(e.j, e.j) -= e.rate;
  }
  return gen;
}

Spectrum::Spectrum(const Generator& gen) {
  require_dense(gen.n());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gen.matrix);
  if (solver.info() != Eigen::Success) throw NumericError("symmetric eigendecomposition failed");
  values_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
}

double Spectrum::gap() const {
  const auto n = values_.size();
  if (n < 2) return 0.0;
  return -values_(n - 2);
}

Matrix Spectrum::kernel(double t) const {
  if (!(t >= 0.0)) throw InvalidArgument("transition kernel needs t >= 0");
  if (t == 0.0) return Matrix::Identity(values_.size(), values_.size());
  const Eigen::VectorXd decay = (values_.array() * t).exp().matrix();
  Matrix p = vectors_ * decay.asDiagonal() * vectors_.transpose();
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      double& v = p(r, c);
      if (v < -1e-12 || v > 1.0 + 1e-12) {
        throw NumericError("transition kernel entry out of range", v);
      }
      v = std::clamp(v, 0.0, 1.0);
    }
  }
  return p;
}

Matrix transition_kernel(const Generator& gen, double t) { return Spectrum(gen).kernel(t); }

double spectral_gap(const Generator& gen) { return Spectrum(gen).gap(); }

SpectralReport spectral_report(const Generator& gen, bool with_log_sobolev) {
  const Spectrum spectrum(gen);
  SpectralReport report;
  report.lambda = spectrum.gap();
  const auto& values = spectrum.eigenvalues();
  for (Eigen::Index k = values.size(); k-- > 0;) report.eigenvalues.push_back(values(k));
  if (with_log_sobolev) report.alpha = log_sobolev(gen);
  return report;
}

double average(std::span<const double> f) {
  double sum = 0.0;
  for (double v : f) sum += v;
  return sum / static_cast<double>(f.size());
}

double l2_norm(std::span<const double> f) {
  double sum = 0.0;
  for (double v : f) sum += v * v;
  return std::sqrt(sum / static_cast<double>(f.size()));
}

double variance(std::span<const double> f) {
  const double mean = average(f);
  double sum = 0.0;
  for (double v : f) sum += (v - mean) * (v - mean);
  return sum / static_cast<double>(f.size());
}

double dirichlet_form(const Geometry& g, std::span<const double> f) {
  if (f.size() != g.n()) throw InvalidArgument("configuration length differs from n");
  double sum = 0.0;
  for (const auto& e : g.edges()) {
    const double d = f[e.i] - f[e.j];
    sum += d * d * e.rate;
  }
  return sum / static_cast<double>(g.n());
}

double dirichlet_form(const Generator& gen, std::span<const double> f) {
  const auto n = static_cast<Eigen::Index>(gen.n());
  if (static_cast<Eigen::Index>(f.size()) != n) {
    throw InvalidArgument("configuration length differs from n");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = f[static_cast<std::size_t>(i)] - f[static_cast<std::size_t>(j)];
      sum += d * d * gen.matrix(i, j);
    }
  }
  return sum / static_cast<double>(n);
}

double entropy(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) {
    if (v < 0.0) throw InvalidArgument("entropy needs a nonnegative configuration");
    if (v > 0.0) sum -= v * std::log(v);
  }
  return sum;
}

double log_sobolev_entropy(std::span<const double> f) {
  double norm2 = 0.0;
  for (double v : f) norm2 += v * v;
  norm2 /= static_cast<double>(f.size());
  if (norm2 == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : f) {
    const double sq = v * v;
    if (sq > 0.0) sum += sq * std::log(sq / norm2);
  }
  return sum / static_cast<double>(f.size());
}

HittingTimes hitting_times(const Generator& gen) {
  require_dense(gen.n());
  const auto n = static_cast<Eigen::Index>(gen.n());
  const double nd = static_cast<double>(n);
  const Matrix pi = Matrix::Constant(n, n, 1.0 / nd);
  const Eigen::PartialPivLU<Matrix> lu(pi - gen.matrix);
  HittingTimes out;
  const double rcond = lu.rcond();
  if (!(rcond > 0.0) || !std::isfinite(rcond)) {
    throw InvalidArgument("hitting-time system is singular (geometry not irreducible)");
  }
  out.condition = 1.0 / rcond;
  out.ill_conditioned = out.condition > 1e12;
  const Matrix z = lu.inverse() - pi;
  out.mean.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.mean(i, j) = i == j ? 0.0 : nd * (z(j, j) - z(i, j));
    }
  }
  return out;
}

double tau_star(const Generator& gen) { return hitting_times(gen).mean.maxCoeff(); }

Matrix meeting_times(const Generator& gen, Speed speed) {
  const std::size_t n = gen.n();
  if (n > kMaxMeetingAgents) {
    throw UnsupportedSize("meeting times support n <= " + std::to_string(kMaxMeetingAgents));
  }
  const double s = speed == Speed::Half ? 0.5 : 1.0;
  // Unordered pair {a < b} -> index.
  std::vector<std::vector<Eigen::Index>> index(n, std::vector<Eigen::Index>(n, -1));
  Eigen::Index count = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) index[a][b] = index[b][a] = count++;
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const Eigen::Index row = index[a][b];
      double out_rate = 0.0;
      // Either coordinate jumps; the other stays put.
      for (int which = 0; which < 2; ++which) {
        const std::size_t mover = which == 0 ? a : b;
        const std::size_t stay = which == 0 ? b : a;
        for (std::size_t c = 0; c < n; ++c) {
          if (c == mover) continue;
          const double r = s * gen.matrix(static_cast<Eigen::Index>(mover), static_cast<Eigen::Index>(c));
          if (r <= 0.0) continue;
          out_rate += r;
          if (c != stay) triplets.emplace_back(row, index[c][stay], r);
        }
      }
      triplets.emplace_back(row, row, -out_rate);
    }
  }
  Matrix result = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (count == 0) return result;
  Eigen::SparseMatrix<double> system(count, count);
  system.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.compute(system);
  if (solver.info() != Eigen::Success) {
    throw InvalidArgument("meeting-time system is singular (geometry not irreducible)");
  }
  const Eigen::VectorXd h = solver.solve(Eigen::VectorXd::Constant(count, -1.0));
  if (solver.info() != Eigen::Success) throw NumericError("meeting-time solve failed");
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      result(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = h(index[a][b]);
      result(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = h(index[a][b]);
    }
  }
  return result;
}

double kingman_mean(std::size_t m) {
  if (m < 1) throw InvalidArgument("Kingman mean needs m >= 1");
  return 2.0 * (1.0 - 1.0 / static_cast<double>(m));
}

void write_matrix_csv(const Matrix& m, std::ostream& out) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ',';
      out << m(r, c);
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace fmie
