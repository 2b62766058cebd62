#pragma once

// The meeting process: independent rate-nu_ij Poisson processes, one per
// unordered pair, each event carrying a direction bit and two auxiliary
// uniforms for randomized update rules.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

#include "fmie/geometry.hpp"
#include "fmie/rng.hpp"

namespace fmie {

inline constexpr double kForever = std::numeric_limits<double>::infinity();

struct MeetingEvent {
  std::uint64_t seq = 0;  // position in the stream; breaks exact time ties
  double t = 0.0;
  AgentId i = 0;  // i < j
  AgentId j = 0;
  std::uint8_t direction = 0;  // 0: arrow i -> j, 1: arrow j -> i
  double aux1 = 0.0;
  double aux2 = 0.0;

  AgentId source() const { return direction == 0 ? i : j; }
  AgentId target() const { return direction == 0 ? j : i; }
  bool involves(AgentId a) const { return a == i || a == j; }
  AgentId other(AgentId a) const { return a == i ? j : i; }
};

/// Walker/Vose alias table over the edges of a geometry. Immutable once
/// built; one table can back any number of streams.
class MeetingSampler {
 public:
  explicit MeetingSampler(const Geometry& g);

  std::size_t n() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  double total_rate() const { return total_rate_; }

  /// Edge index with probability rate_e / total_rate.
  std::uint32_t sample(Rng& rng) const;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  double total_rate_ = 0.0;
  std::vector<double> threshold_;
  std::vector<std::uint32_t> alias_;
};

enum class StreamBackend {
  Superposition,  // merged Exponential(R) clock + alias pick
  PerEdgeQueue,   // one Exponential(nu_e) clock per edge in a priority queue
};

/// Lazily generated, single-consumer event stream. Two streams with equal
/// (geometry, key, backend) yield identical sequences.
class EventStream {
 public:
  EventStream(const Geometry& g, std::uint64_t seed, double horizon = kForever,
              StreamBackend backend = StreamBackend::Superposition);
  EventStream(std::shared_ptr<const MeetingSampler> sampler, StreamKey key,
              double horizon = kForever, StreamBackend backend = StreamBackend::Superposition);

  /// Next event at time <= horizon, or nullopt once the horizon is passed.
  std::optional<MeetingEvent> next();

  /// The event next() would return, without consuming it.
  const MeetingEvent* peek();

  std::size_t n() const { return sampler_->n(); }
  double horizon() const { return horizon_; }
  StreamKey key() const { return key_; }
  const MeetingSampler& sampler() const { return *sampler_; }
  std::shared_ptr<const MeetingSampler> sampler_ptr() const { return sampler_; }

  /// Substream reserved for rule-level randomness outside the meetings
  /// (fashion originations, FPP edge lengths). Independent of the events.
  Rng side_rng(std::uint64_t substream) const { return Rng(key_, substream); }

 private:
  MeetingEvent generate();

  std::shared_ptr<const MeetingSampler> sampler_;
  StreamKey key_;
  double horizon_;
  StreamBackend backend_;
  Rng rng_;
  double clock_ = 0.0;
  std::uint64_t seq_ = 0;
  std::optional<MeetingEvent> pending_;
  bool exhausted_ = false;

  using QueueItem = std::pair<double, std::uint32_t>;
  std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue_;
};

/// Substream ids used with EventStream::side_rng.
inline constexpr std::uint64_t kMeetingSubstream = 0;
inline constexpr std::uint64_t kOriginationSubstream = 1;
inline constexpr std::uint64_t kEdgeLengthSubstream = 2;

EventStream event_stream(const Geometry& g, std::uint64_t seed, double horizon = kForever);

/// Streams for replicas 0..count-1, keyed (master_seed, index) and sharing one
/// alias table. Replica 0 coincides with event_stream(g, master_seed).
std::vector<EventStream> replica_streams(const Geometry& g, std::uint64_t master_seed,
                                         std::size_t count, double horizon = kForever);

/// CSV event log: seq,t,i,j,direction,aux1,aux2 (17 significant digits).
/// Writes at most max_events rows.
void write_event_log(EventStream& stream, std::ostream& out, std::size_t max_events);

}  // namespace fmie
