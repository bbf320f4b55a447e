#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace citegap {

__extension__ using uint128 = unsigned __int128;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic 64-bit generator addressed by (seed, stream).
///
/// The initial state is mix64(mix64(seed) + stream * 0xD1B54A32D192ED03) and
/// successive outputs follow the SplitMix64 sequence. Null models use one
/// stream per original edge index, so draws do not depend on processing order
/// or worker count. Bounded draws use Lemire's multiply-shift with rejection,
/// which keeps results identical across standard library implementations.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  static constexpr const char* kName = "splitmix64-stream-v1";

  constexpr StreamRng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix64(mix64(seed) + stream * 0xD1B54A32D192ED03ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    uint128 m = static_cast<uint128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<uint128>((*this)()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Fisher-Yates shuffle driven by StreamRng::below.
template <class T>
void shuffle(std::span<T> items, StreamRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace citegap
