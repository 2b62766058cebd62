#pragma once

#include <algorithm>
#include <span>

#include "fmie/error.hpp"
#include "fmie/meetings.hpp"
#include "fmie/rules.hpp"

namespace fmie {

namespace detail {

/// Drives Fashionista with merged originations; calls observe(t) per sample.
template <class Observer>
std::uint64_t drive_fashionista(Fashionista& rule, std::size_t n, double lambda,
                                EventStream& stream, std::span<const double> sample_times,
                                Observer&& observe) {
  if (!(lambda > 0.0)) throw InvalidArgument("fashionista needs lambda > 0");
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    if (!(sample_times[k] >= 0.0) || (k > 0 && sample_times[k] < sample_times[k - 1])) {
      throw InvalidArgument("sample times must be ascending and >= 0");
    }
  }
  Rng origin = stream.side_rng(kOriginationSubstream);
  double next_origin = origin.exponential(lambda);
  std::size_t next_sample = 0;
  std::uint64_t events = 0;
  while (next_sample < sample_times.size()) {
    const MeetingEvent* ev = stream.peek();
    const double t_event = ev != nullptr ? ev->t : kForever;
    const double t_origin = next_origin <= stream.horizon() ? next_origin : kForever;
    const double t = std::min(t_event, t_origin);
    while (next_sample < sample_times.size() && sample_times[next_sample] < t) {
      observe(sample_times[next_sample++]);
    }
    if (t == kForever) break;
    if (t_origin < t_event) {
      rule.originate(static_cast<AgentId>(origin.below(n)), t_origin);
      next_origin += origin.exponential(lambda);
    } else {
      rule.apply(*ev);
      stream.next();
    }
    ++events;
  }
  return events;
}

}  // namespace detail

}  // namespace fmie
