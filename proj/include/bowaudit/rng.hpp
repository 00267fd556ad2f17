#pragma once

// PCG32 (XSH-RR 64/32) as published by M. O'Neill. Seeding follows the
// reference pcg32_srandom_r(state, stream); every sampler in this project uses
// stream 54, so seed k produces the same sequence on every platform.

#include <cstdint>
#include <limits>

namespace bowaudit {

class Pcg32 {
 public:
  using result_type = std::uint32_t;
  static constexpr std::uint64_t kDefaultStream = 54;

  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = kDefaultStream) {
    state_ = 0;
    inc_ = (stream << 1u) | 1u;
    (*this)();
    state_ += seed;
    (*this)();
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  // Unbiased integer in [0, bound), by rejection (pcg32_boundedrand_r).
  std::uint32_t bounded(std::uint32_t bound) {
    const std::uint32_t threshold = (-bound) % bound;
    for (;;) {
      const std::uint32_t r = (*this)();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 32 bits of resolution.
  double uniform() { return (*this)() * (1.0 / 4294967296.0); }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
};

}  // namespace bowaudit
