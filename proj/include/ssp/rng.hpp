#pragma once

#include <cstdint>

namespace ssp {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream keyed by (seed, stream id).
///
/// The i-th draw is a pure function of (seed, stream id, i), so a trial's
/// randomness does not depend on which worker runs it or in what order.
class CounterStream {
public:
  constexpr CounterStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_(mix64(seed ^ mix64(stream_id + 0x632be59bd9b4e019ULL))) {}

  constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  /// Uniform double on the open interval (0, 1).
  constexpr double next_unit() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  constexpr std::uint64_t position() const noexcept { return counter_; }

private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ssp
