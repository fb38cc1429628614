#pragma once

#include <cstdint>
#include <limits>

namespace misinfo {

/// SplitMix64 finalizer. Every per-record seed in the pipeline is derived
/// through this function so independent implementations agree bit-for-bit.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// mix(seed, id, tag) = f(f(f(seed) ^ id) ^ tag) with f = splitmix64.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t id,
                                 std::uint64_t tag) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ id) ^ tag);
}

/// SplitMix64 stream generator; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    const std::uint64_t out = splitmix64(state_);
    state_ += 0x9E3779B97F4A7C15ULL;
    return out;
  }

 private:
  std::uint64_t state_;
};

/// Unbiased draw from [0, bound) by rejection. `bound` must be non-zero.
/// Standard distributions are implementation-defined, so seeded draws that
/// end up in output files go through this instead.
template <typename Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

/// Fair coin: the top bit of one draw.
template <typename Rng>
bool fair_coin(Rng& rng) {
  return (rng() >> 63) != 0;
}

/// Uniform float in [-1, 1) from the top 24 bits of one draw.
template <typename Rng>
float symmetric_unit(Rng& rng) {
  const auto bits = static_cast<std::uint32_t>(rng() >> 40);
  return static_cast<float>(bits) * (2.0f / 16777216.0f) - 1.0f;
}

}  // namespace misinfo
