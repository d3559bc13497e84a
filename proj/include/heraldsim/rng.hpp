#pragma once

#include <cstdint>
#include <limits>

namespace heraldsim {

/// Counter-based random stream: a SplitMix64 sequence whose starting state
/// is a hash of (seed, stream index). Any trial can be regenerated in
/// isolation, so results do not depend on how trials are scheduled.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent seed for a named sub-run (sweep row, bootstrap...).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return CounterRng::mix(seed + CounterRng::mix(salt ^ 0xD1B54A32D192ED03ULL));
}

}  // namespace heraldsim
