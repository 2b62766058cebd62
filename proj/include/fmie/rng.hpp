#pragma once

// Counter-based random numbers.
//
// Every random quantity in the toolkit is drawn from Philox4x64-10
// (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3"), keyed by
// a (seed, stream) pair. A stream never shares state with another stream, so
// replica i of master seed s is simply the key (s, i); no seed hashing is
// involved and any replica can be regenerated in isolation.
//
// Variates are produced with hand-written transforms instead of
// <random> distributions so results are bit-identical across standard
// libraries.

#include <array>
#include <cmath>
#include <cstdint>

namespace fmie {

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// One Philox4x64-10 block: four 64-bit words from a 256-bit counter.
inline std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                               std::array<std::uint64_t, 2> key) {
  constexpr std::uint64_t kM0 = 0xD2E7470EE14C6C93ULL;
  constexpr std::uint64_t kM1 = 0xCA5A826395121157ULL;
  constexpr std::uint64_t kW0 = 0x9E3779B97F4A7C15ULL;
  constexpr std::uint64_t kW1 = 0xBB67AE8584CAA73BULL;
  for (int round = 0; round < 10; ++round) {
    const unsigned __int128 p0 = static_cast<unsigned __int128>(kM0) * ctr[0];
    const unsigned __int128 p1 = static_cast<unsigned __int128>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint64_t>(p0 >> 64);
    const auto lo0 = static_cast<std::uint64_t>(p0);
    const auto hi1 = static_cast<std::uint64_t>(p1 >> 64);
    const auto lo1 = static_cast<std::uint64_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

/// Sequential generator over one keyed Philox stream.
///
/// `substream` occupies the second counter word, so a single key can feed
/// several independent consumers (meetings, originations, edge lengths).
/// Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng() = default;
  explicit Rng(StreamKey key, std::uint64_t substream = 0)
      : key_{key.seed, key.stream}, substream_(substream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    if (pos_ == 4) {
      ++block_;
      buffer_ = philox4x64({block_, substream_, 0, 0}, key_);
      pos_ = 0;
    }
    return buffer_[pos_++];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1); never returns 0.
  double uniform_open() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential with the given rate (rate > 0).
  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

  /// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Draws consumed so far (blocks * 4 + position); used by determinism tests.
  std::uint64_t draws() const { return block_ * 4 + pos_ - 4; }

 private:
  std::array<std::uint64_t, 2> key_{0, 0};
  std::uint64_t substream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  int pos_ = 4;
};

/// Per-replica key under counter-based splitting: replica i of `master` is
/// the Philox key (master, i).
inline StreamKey replica_key(std::uint64_t master_seed, std::uint64_t index) {
  return StreamKey{master_seed, index};
}

}  // namespace fmie
