#pragma once

// Update rules of the FMIE processes and the event loop that drives them.
//
// A rule sees one MeetingEvent at a time and may only touch the two agents
// named in it (plus the event's direction and aux draws). Replaying the same
// stream through the same rule reproduces the same trajectory.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fmie/geometry.hpp"
#include "fmie/meetings.hpp"

namespace fmie {

inline constexpr AgentId kNoAgent = std::numeric_limits<AgentId>::max();

template <class Rule>
concept UpdateRule = requires(Rule rule, const MeetingEvent& ev) {
  rule.apply(ev);
  { rule.absorbed() } -> std::convertible_to<bool>;
};

struct RunResult {
  double end_time = 0.0;         // time of the last applied event (or horizon)
  bool absorbed = false;
  double absorption_time = kForever;
  std::uint64_t events = 0;      // events applied
};

/// Feeds stream events to `rule` in time order. `observe(t)` is called once
/// per sample time (ascending) with the state reflecting all events at
/// times <= t. Stops at absorption or when the stream passes its horizon;
/// after absorption the remaining sample times observe the frozen state,
/// otherwise sample times beyond the horizon are skipped.
template <UpdateRule Rule, class Observer>
RunResult run(Rule& rule, EventStream& stream, std::span<const double> sample_times,
              Observer&& observe) {
  RunResult result;
  std::size_t next_sample = 0;
  if (rule.absorbed()) {
    result.absorbed = true;
    result.absorption_time = 0.0;
  }
  while (!result.absorbed) {
    const MeetingEvent* ev = stream.peek();
    if (ev == nullptr) break;
    while (next_sample < sample_times.size() && sample_times[next_sample] < ev->t) {
      observe(sample_times[next_sample++]);
    }
    rule.apply(*ev);
    result.end_time = ev->t;
    ++result.events;
    if (rule.absorbed()) {
      result.absorbed = true;
      result.absorption_time = ev->t;
    }
    stream.next();
  }
  const double limit = result.absorbed ? kForever : stream.horizon();
  while (next_sample < sample_times.size() && sample_times[next_sample] <= limit) {
    observe(sample_times[next_sample++]);
  }
  if (!result.absorbed && std::isfinite(stream.horizon())) result.end_time = stream.horizon();
  return result;
}

template <UpdateRule Rule>
RunResult run(Rule& rule, EventStream& stream) {
  return run(rule, stream, std::span<const double>{}, [](double) {});
}

/// One token passed from holder to the other party at each meeting (the
/// associated chain). Half speed passes only along the event's arrow.
/// kNoAgent as holder means no token exists.
class TokenProcess {
 public:
  TokenProcess(std::size_t n, AgentId holder, bool half_speed = false);
  void apply(const MeetingEvent& ev);
  bool absorbed() const { return false; }
  AgentId holder() const { return holder_; }
  std::size_t n() const { return n_; }

 private:
  std::size_t n_;
  AgentId holder_;
  bool half_speed_;
};

/// SI epidemic: a meeting between an infected and a healthy agent infects
/// the healthy one.
class Pandemic {
 public:
  Pandemic(std::size_t n, std::span<const AgentId> sources);
  Pandemic(std::size_t n, AgentId source) : Pandemic(n, std::span<const AgentId>(&source, 1)) {}
  void apply(const MeetingEvent& ev);
  bool absorbed() const { return count_ == infection_time_.size(); }

  bool infected(AgentId a) const { return infection_time_[a] < kForever; }
  std::size_t infected_count() const { return count_; }
  const std::vector<double>& infection_times() const { return infection_time_; }
  /// D(k): time at which k agents are infected, k = 1..count.
  const std::vector<double>& count_times() const { return count_times_; }

 private:
  std::vector<double> infection_time_;
  std::vector<double> count_times_;
  std::size_t count_ = 0;
};

/// Meeting agents split their combined money equally. Tracks the Dirichlet
/// form and the number of unequal edges incrementally; absorbed once every
/// edge is equal (the configuration is constant).
class Averaging {
 public:
  Averaging(const Geometry& g, std::vector<double> x0);
  void apply(const MeetingEvent& ev);
  bool absorbed() const { return unequal_edges_ == 0; }

  const std::vector<double>& money() const { return x_; }
  double dirichlet() const { return std::max(dirichlet_, 0.0); }
  /// Recomputes the Dirichlet form from scratch (no accumulated rounding).
  double dirichlet_exact() const;
  /// Entropy change at the most recent event (>= 0 up to rounding).
  double last_entropy_delta() const { return last_entropy_delta_; }

 private:
  double local_energy(AgentId a) const;
  std::size_t local_unequal(AgentId a) const;

  const Geometry* g_;
  std::vector<double> x_;
  double dirichlet_ = 0.0;
  std::size_t unequal_edges_ = 0;
  double last_entropy_delta_ = 0.0;
};

/// Two pennies: at a meeting involving a penny's owner, that penny moves to
/// the other party with probability 1/2, independently per penny (aux1 for
/// the first, aux2 for the second).
class CoupledPennies {
 public:
  CoupledPennies(AgentId z1, AgentId z2) : z1_(z1), z2_(z2) {}
  void apply(const MeetingEvent& ev);
  bool absorbed() const { return false; }
  AgentId first() const { return z1_; }
  AgentId second() const { return z2_; }

 private:
  AgentId z1_;
  AgentId z2_;
};

/// Voter model: along arrow i -> j, agent j adopts i's opinion. Opinions are
/// labels 0..L-1 (initially agent a holds label a, or a caller-supplied
/// assignment).
class Voter {
 public:
  explicit Voter(std::size_t n);
  explicit Voter(std::vector<std::uint32_t> opinions);
  void apply(const MeetingEvent& ev);
  bool absorbed() const { return distinct_ == 1; }

  const std::vector<std::uint32_t>& opinions() const { return opinion_; }
  /// counts()[l] = |V_l| for label l.
  const std::vector<std::uint32_t>& counts() const { return count_; }
  std::size_t distinct() const { return distinct_; }

 private:
  std::vector<std::uint32_t> opinion_;
  std::vector<std::uint32_t> count_;
  std::size_t distinct_ = 0;
};

/// Coalescing chains: along arrow i -> j, agent i hands its whole cluster of
/// tokens to j. Optionally records, for each token pair, the first time they
/// share a cluster.
class Coalescing {
 public:
  explicit Coalescing(std::size_t n, bool track_meetings = false);
  void apply(const MeetingEvent& ev);
  bool absorbed() const { return clusters_ == 1; }

  const std::vector<std::vector<std::uint32_t>>& clusters() const { return cluster_; }
  std::size_t cluster_count() const { return clusters_; }
  /// first_meeting()[a * n + b]; kForever if not yet met; 0 on the diagonal.
  const std::vector<double>& first_meeting() const { return meet_; }
  /// (time, cluster count) after each merge.
  const std::vector<std::pair<double, std::size_t>>& count_path() const { return count_path_; }

 private:
  std::size_t n_;
  std::vector<std::vector<std::uint32_t>> cluster_;
  std::size_t clusters_;
  bool track_;
  std::vector<double> meet_;
  std::vector<std::pair<double, std::size_t>> count_path_;
};

/// Compulsive gambler: the meeting pair plays for the combined stake, agent
/// i winning with probability a/(a+b) (decided by aux1). Absorbed when the
/// agents holding money form an independent set.
class Gambler {
 public:
  Gambler(const Geometry& g, std::vector<double> x0);
  void apply(const MeetingEvent& ev);
  bool absorbed() const { return active_edges_ == 0; }
  const std::vector<double>& money() const { return x_; }

 private:
  std::size_t rich_neighbors(AgentId a) const;

  const Geometry* g_;
  std::vector<double> x_;
  std::size_t active_edges_ = 0;
};

/// Interchange: meeting agents swap tokens. token_at()[a] is agent a's token.
class Interchange {
 public:
  explicit Interchange(std::size_t n);
  explicit Interchange(std::vector<std::uint32_t> tokens);
  void apply(const MeetingEvent& ev);
  bool absorbed() const { return false; }
  const std::vector<std::uint32_t>& token_at() const { return token_; }
  int parity() const { return parity_; }

 private:
  std::vector<std::uint32_t> token_;
  int parity_ = 0;
};

/// Deference: meeting agents both take the smaller opinion label. Label 0
/// plays the role of opinion 1.
class Deference {
 public:
  explicit Deference(std::size_t n);
  explicit Deference(std::vector<std::uint32_t> labels);
  void apply(const MeetingEvent& ev);
  bool absorbed() const { return count_[min_label_] == label_.size(); }

  const std::vector<std::uint32_t>& labels() const { return label_; }
  const std::vector<std::uint32_t>& counts() const { return count_; }

 private:
  std::vector<std::uint32_t> label_;
  std::vector<std::uint32_t> count_;
  std::uint32_t min_label_ = 0;
};

/// Fashionista: both meeting agents adopt the more recent fashion. Fashion
/// ids increase with origination time, so "more recent" is "larger id".
class Fashionista {
 public:
  explicit Fashionista(std::size_t n);
  explicit Fashionista(std::vector<std::uint64_t> fashions);
  void apply(const MeetingEvent& ev);
  bool absorbed() const { return false; }
  /// A new fashion starts at agent a at time t.
  void originate(AgentId a, double t);

  const std::vector<std::uint64_t>& fashions() const { return fashion_; }
  /// Origination time of each agent's current fashion.
  double stamp_of(AgentId a) const { return stamp_[fashion_[a]]; }
  /// P(two distinct uniform agents share a fashion) = sum c(c-1) / (n(n-1)).
  double diversity() const;
  std::size_t live_fashions() const { return live_; }
  std::size_t originations() const { return stamp_.size() - base_; }
  std::vector<std::uint32_t> block_sizes() const;

 private:
  void move(AgentId a, std::uint64_t to);

  std::vector<std::uint64_t> fashion_;
  std::vector<double> stamp_;        // by fashion id
  std::vector<std::uint32_t> count_;  // by fashion id
  std::size_t base_ = 0;              // ids below this existed at time 0
  std::size_t live_ = 0;
  std::uint64_t pairs_ = 0;  // sum over fashions of c(c-1)
};

}  // namespace fmie
