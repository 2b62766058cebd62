#include "fmie/meetings.hpp"

#include <iomanip>
#include <ostream>

#include "fmie/error.hpp"

namespace fmie {

MeetingSampler::MeetingSampler(const Geometry& g)
    : n_(g.n()), edges_(g.edges().begin(), g.edges().end()) {
  const std::size_t m = edges_.size();
  if (m == 0) throw InvalidArgument("meeting process needs at least one edge");
  for (const auto& e : edges_) total_rate_ += e.rate;

  threshold_.assign(m, 1.0);
  alias_.resize(m);
  std::vector<double> scaled(m);
  std::vector<std::uint32_t> small;
  std::vector<std::uint32_t> large;
  for (std::uint32_t k = 0; k < m; ++k) {
    alias_[k] = k;
    scaled[k] = edges_[k].rate * static_cast<double>(m) / total_rate_;
    (scaled[k] < 1.0 ? small : large).push_back(k);
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    threshold_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (auto k : small) threshold_[k] = 1.0;
  for (auto k : large) threshold_[k] = 1.0;
}

std::uint32_t MeetingSampler::sample(Rng& rng) const {
  const auto column = static_cast<std::uint32_t>(rng.below(edges_.size()));
  return rng.uniform() < threshold_[column] ? column : alias_[column];
}

EventStream::EventStream(const Geometry& g, std::uint64_t seed, double horizon,
                         StreamBackend backend)
    : EventStream(std::make_shared<const MeetingSampler>(g), StreamKey{seed, 0}, horizon,
                  backend) {}

EventStream::EventStream(std::shared_ptr<const MeetingSampler> sampler, StreamKey key,
                         double horizon, StreamBackend backend)
    : sampler_(std::move(sampler)),
      key_(key),
      horizon_(horizon),
      backend_(backend),
      rng_(key, kMeetingSubstream) {
  if (!(horizon >= 0.0)) throw InvalidArgument("horizon must be >= 0");
  if (backend_ == StreamBackend::PerEdgeQueue) {
    const auto& edges = sampler_->edges();
    for (std::uint32_t k = 0; k < edges.size(); ++k) {
      queue_.emplace(rng_.exponential(edges[k].rate), k);
    }
  }
}

MeetingEvent EventStream::generate() {
  MeetingEvent ev;
  std::uint32_t edge = 0;
  if (backend_ == StreamBackend::Superposition) {
    clock_ += rng_.exponential(sampler_->total_rate());
    edge = sampler_->sample(rng_);
  } else {
    const auto [t, k] = queue_.top();
    queue_.pop();
    clock_ = t;
    edge = k;
    queue_.emplace(t + rng_.exponential(sampler_->edges()[k].rate), k);
  }
  const auto& e = sampler_->edges()[edge];
  ev.seq = seq_++;
  ev.t = clock_;
  ev.i = e.i;
  ev.j = e.j;
  ev.direction = static_cast<std::uint8_t>(rng_() >> 63);
  ev.aux1 = rng_.uniform();
  ev.aux2 = rng_.uniform();
  return ev;
}

const MeetingEvent* EventStream::peek() {
  if (exhausted_) return nullptr;
  if (!pending_) {
    pending_ = generate();
  }
  if (pending_->t > horizon_) {
    exhausted_ = true;
    return nullptr;
  }
  return &*pending_;
}

std::optional<MeetingEvent> EventStream::next() {
  if (peek() == nullptr) return std::nullopt;
  std::optional<MeetingEvent> out;
  out.swap(pending_);
  return out;
}

EventStream event_stream(const Geometry& g, std::uint64_t seed, double horizon) {
  return EventStream(g, seed, horizon);
}

std::vector<EventStream> replica_streams(const Geometry& g, std::uint64_t master_seed,
                                         std::size_t count, double horizon) {
  if (count < 1) throw InvalidArgument("replica count must be >= 1");
  auto sampler = std::make_shared<const MeetingSampler>(g);
  std::vector<EventStream> streams;
  streams.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    streams.emplace_back(sampler, replica_key(master_seed, r), horizon);
  }
  return streams;
}

void write_event_log(EventStream& stream, std::ostream& out, std::size_t max_events) {
  out << "seq,t,i,j,direction,aux1,aux2\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (std::size_t k = 0; k < max_events; ++k) {
    const auto ev = stream.next();
    if (!ev) break;
    out << ev->seq << ',' << ev->t << ',' << ev->i << ',' << ev->j << ','
        << static_cast<int>(ev->direction) << ',' << ev->aux1 << ',' << ev->aux2 << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace fmie
