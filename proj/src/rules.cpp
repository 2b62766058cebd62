#include "fmie/rules.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "fmie/error.hpp"

namespace fmie {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void check_agent(AgentId a, std::size_t n, const char* what) {
  if (a >= n) throw InvalidArgument(std::string(what) + ": agent out of range");
}

}  // namespace

// ---- Token ---------------------------------------------------------------------

TokenProcess::TokenProcess(std::size_t n, AgentId holder, bool half_speed)
    : n_(n), holder_(holder), half_speed_(half_speed) {
  if (holder != kNoAgent) check_agent(holder, n, "token");
}

void TokenProcess::apply(const MeetingEvent& ev) {
  if (holder_ == kNoAgent || !ev.involves(holder_)) return;
  if (half_speed_ && ev.source() != holder_) return;
  holder_ = ev.other(holder_);
}

// ---- Pandemic ------------------------------------------------------------------

Pandemic::Pandemic(std::size_t n, std::span<const AgentId> sources) : infection_time_(n, kForever) {
  if (sources.empty()) throw InvalidArgument("pandemic needs at least one source");
  for (auto s : sources) {
    check_agent(s, n, "pandemic source");
    if (infection_time_[s] == 0.0) continue;
    infection_time_[s] = 0.0;
    ++count_;
    count_times_.push_back(0.0);
  }
}

void Pandemic::apply(const MeetingEvent& ev) {
  const bool a = infection_time_[ev.i] < kForever;
  const bool b = infection_time_[ev.j] < kForever;
  if (a == b) return;
  infection_time_[a ? ev.j : ev.i] = ev.t;
  ++count_;
  count_times_.push_back(ev.t);
}

// ---- Averaging -----------------------------------------------------------------

Averaging::Averaging(const Geometry& g, std::vector<double> x0) : g_(&g), x_(std::move(x0)) {
  if (x_.size() != g.n()) throw InvalidArgument("averaging: initial configuration length != n");
  for (double v : x_) {
    if (!std::isfinite(v)) throw InvalidArgument("averaging: non-finite initial value");
  }
  for (const auto& e : g.edges()) {
    const double d = x_[e.i] - x_[e.j];
    dirichlet_ += d * d * e.rate;
    if (d != 0.0) ++unequal_edges_;
  }
  dirichlet_ /= static_cast<double>(g.n());
}

double Averaging::local_energy(AgentId a) const {
  double sum = 0.0;
  for (const auto& nb : g_->neighbors(a)) {
    const double d = x_[a] - x_[nb.agent];
    sum += d * d * nb.rate;
  }
  return sum;
}

std::size_t Averaging::local_unequal(AgentId a) const {
  std::size_t count = 0;
  for (const auto& nb : g_->neighbors(a)) count += x_[a] != x_[nb.agent] ? 1 : 0;
  return count;
}

void Averaging::apply(const MeetingEvent& ev) {
  const AgentId i = ev.i;
  const AgentId j = ev.j;
  if (x_[i] == x_[j]) {
    last_entropy_delta_ = 0.0;
    return;
  }
  // Edge (i, j) is counted in both local sums; correct for it once.
  const double pair_rate = g_->rate(i, j);
  const double d_old = x_[i] - x_[j];
  const double before = local_energy(i) + local_energy(j) - d_old * d_old * pair_rate;
  const std::size_t unequal_before = local_unequal(i) + local_unequal(j) - 1;
  const double mid = 0.5 * (x_[i] + x_[j]);
  last_entropy_delta_ = xlogx(x_[i]) + xlogx(x_[j]) - 2.0 * xlogx(mid);
  x_[i] = mid;
  x_[j] = mid;
  const double after = local_energy(i) + local_energy(j);
  const std::size_t unequal_after = local_unequal(i) + local_unequal(j);
  dirichlet_ += (after - before) / static_cast<double>(g_->n());
  unequal_edges_ = unequal_edges_ + unequal_after - unequal_before;
}

double Averaging::dirichlet_exact() const {
  double sum = 0.0;
  for (const auto& e : g_->edges()) {
    const double d = x_[e.i] - x_[e.j];
    sum += d * d * e.rate;
  }
  return sum / static_cast<double>(g_->n());
}

// ---- Coupled pennies -------------------------------------------------------------

void CoupledPennies::apply(const MeetingEvent& ev) {
  if (ev.involves(z1_) && ev.aux1 < 0.5) z1_ = ev.other(z1_);
  if (ev.involves(z2_) && ev.aux2 < 0.5) z2_ = ev.other(z2_);
}

// ---- Voter -----------------------------------------------------------------------

Voter::Voter(std::size_t n) : opinion_(n), count_(n, 1), distinct_(n) {
  std::iota(opinion_.begin(), opinion_.end(), 0u);
}

Voter::Voter(std::vector<std::uint32_t> opinions) : opinion_(std::move(opinions)) {
  if (opinion_.empty()) throw InvalidArgument("voter: empty configuration");
  const auto top = *std::max_element(opinion_.begin(), opinion_.end());
  count_.assign(static_cast<std::size_t>(top) + 1, 0);
  for (auto o : opinion_) {
    if (count_[o]++ == 0) ++distinct_;
  }
}

void Voter::apply(const MeetingEvent& ev) {
  const auto from = opinion_[ev.source()];
  auto& to = opinion_[ev.target()];
  if (from == to) return;
  if (--count_[to] == 0) --distinct_;
  ++count_[from];
  to = from;
}

// ---- Coalescing ------------------------------------------------------------------

Coalescing::Coalescing(std::size_t n, bool track_meetings)
    : n_(n), cluster_(n), clusters_(n), track_(track_meetings) {
  for (std::uint32_t a = 0; a < n; ++a) cluster_[a].push_back(a);
  if (track_) {
    meet_.assign(n * n, kForever);
    for (std::size_t a = 0; a < n; ++a) meet_[a * n + a] = 0.0;
  }
}

void Coalescing::apply(const MeetingEvent& ev) {
  auto& from = cluster_[ev.source()];
  auto& to = cluster_[ev.target()];
  if (from.empty()) return;
  if (!to.empty()) {
    if (track_) {
      for (auto a : from) {
        for (auto b : to) {
          meet_[a * n_ + b] = ev.t;
          meet_[b * n_ + a] = ev.t;
        }
      }
    }
    --clusters_;
    count_path_.emplace_back(ev.t, clusters_);
  }
  to.insert(to.end(), from.begin(), from.end());
  from.clear();
}

// ---- Gambler ---------------------------------------------------------------------

Gambler::Gambler(const Geometry& g, std::vector<double> x0) : g_(&g), x_(std::move(x0)) {
  if (x_.size() != g.n()) throw InvalidArgument("gambler: initial configuration length != n");
  for (double v : x_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("gambler: stakes must be >= 0");
  }
  for (const auto& e : g.edges()) {
    if (x_[e.i] > 0.0 && x_[e.j] > 0.0) ++active_edges_;
  }
}

std::size_t Gambler::rich_neighbors(AgentId a) const {
  std::size_t count = 0;
  for (const auto& nb : g_->neighbors(a)) count += x_[nb.agent] > 0.0 ? 1 : 0;
  return count;
}

void Gambler::apply(const MeetingEvent& ev) {
  const double a = x_[ev.i];
  const double b = x_[ev.j];
  if (a == 0.0 || b == 0.0) return;  // nothing at stake on one side
  const AgentId winner = ev.aux1 * (a + b) < a ? ev.i : ev.j;
  const AgentId loser = winner == ev.i ? ev.j : ev.i;
  // The loser's active edges disappear (the winner stays rich).
  active_edges_ -= rich_neighbors(loser);
  x_[winner] = a + b;
  x_[loser] = 0.0;
}

// ---- Interchange -------------------------------------------------------------------

Interchange::Interchange(std::size_t n) : token_(n) {
  std::iota(token_.begin(), token_.end(), 0u);
}

Interchange::Interchange(std::vector<std::uint32_t> tokens) : token_(std::move(tokens)) {}

void Interchange::apply(const MeetingEvent& ev) {
  std::swap(token_[ev.i], token_[ev.j]);
  parity_ ^= 1;
}

// ---- Deference ---------------------------------------------------------------------

Deference::Deference(std::size_t n) : label_(n), count_(n, 1) {
  std::iota(label_.begin(), label_.end(), 0u);
}

Deference::Deference(std::vector<std::uint32_t> labels) : label_(std::move(labels)) {
  if (label_.empty()) throw InvalidArgument("deference: empty configuration");
  const auto top = *std::max_element(label_.begin(), label_.end());
  min_label_ = *std::min_element(label_.begin(), label_.end());
  count_.assign(static_cast<std::size_t>(top) + 1, 0);
  for (auto l : label_) ++count_[l];
}

void Deference::apply(const MeetingEvent& ev) {
  auto& a = label_[ev.i];
  auto& b = label_[ev.j];
  if (a == b) return;
  if (a < b) {
    --count_[b];
    ++count_[a];
    b = a;
  } else {
    --count_[a];
    ++count_[b];
    a = b;
  }
}

// ---- Fashionista -------------------------------------------------------------------

Fashionista::Fashionista(std::size_t n) : Fashionista(std::vector<std::uint64_t>(n, 0)) {}

Fashionista::Fashionista(std::vector<std::uint64_t> fashions) : fashion_(std::move(fashions)) {
  if (fashion_.empty()) throw InvalidArgument("fashionista: empty configuration");
  const auto top = *std::max_element(fashion_.begin(), fashion_.end());
  base_ = static_cast<std::size_t>(top) + 1;
  stamp_.assign(base_, 0.0);
  count_.assign(base_, 0);
  for (auto f : fashion_) ++count_[f];
  for (auto c : count_) {
    if (c > 0) ++live_;
    pairs_ += static_cast<std::uint64_t>(c) * (c > 0 ? c - 1 : 0);
  }
}

void Fashionista::move(AgentId a, std::uint64_t to) {
  const auto from = fashion_[a];
  if (from == to) return;
  auto& cf = count_[from];
  auto& ct = count_[to];
  // c(c-1) changes by -2(c-1) when c decreases, +2c when it increases.
  pairs_ -= 2 * static_cast<std::uint64_t>(cf - 1);
  pairs_ += 2 * static_cast<std::uint64_t>(ct);
  if (--cf == 0) --live_;
  if (ct++ == 0) ++live_;
  fashion_[a] = to;
}

void Fashionista::apply(const MeetingEvent& ev) {
  const auto a = fashion_[ev.i];
  const auto b = fashion_[ev.j];
  if (a == b) return;
  if (a > b) {
    move(ev.j, a);
  } else {
    move(ev.i, b);
  }
}

void Fashionista::originate(AgentId a, double t) {
  stamp_.push_back(t);
  count_.push_back(0);
  move(a, stamp_.size() - 1);
}

double Fashionista::diversity() const {
  const double n = static_cast<double>(fashion_.size());
  return static_cast<double>(pairs_) / (n * (n - 1.0));
}

std::vector<std::uint32_t> Fashionista::block_sizes() const {
  std::vector<std::uint32_t> sizes;
  for (auto c : count_) {
    if (c > 0) sizes.push_back(c);
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

}  // namespace fmie
