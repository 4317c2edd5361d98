#pragma once

#include <cstdint>
#include <initializer_list>
#include <utility>

namespace loopsim {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

// Purpose tags so that independent draws for the same (round, session) never
// share a stream.
enum class StreamPurpose : std::uint64_t {
  kSynthetic = 1,
  kSeed = 2,
  kAccept = 3,
};

// Counter-based random stream. The state is a pure function of the master
// seed and a key tuple, so draws do not depend on the order in which streams
// are created or consumed by worker threads.
//
// The bounded-integer and unit-interval helpers are implemented here rather
// than through <random> distributions, whose output is not specified
// bit-for-bit across standard library implementations.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> key) {
    std::uint64_t h = detail::splitmix64(master_seed);
    for (std::uint64_t k : key) h = detail::splitmix64(h ^ detail::splitmix64(k));
    state_ = h;
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace loopsim
