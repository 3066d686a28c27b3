#pragma once

#include <cmath>
#include <cstdint>

namespace sjl {

// Seed of a reproducible stream. `root` identifies the experiment, `stream`
// separates independent uses of the same root (matrix sampling, Gaussian
// redraws, vector generation, ...).
struct Seed {
  std::uint64_t root = 0;
  std::uint64_t stream = 0;
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

// Key of the (trial, column) cell of a stream. Every random decision in the
// library is a pure function of such a key, so no result depends on how
// trials are scheduled across threads.
constexpr std::uint64_t cell_key(const Seed& seed, std::uint64_t trial,
                                 std::uint64_t column) noexcept {
  std::uint64_t k = detail::mix64(seed.root + detail::kGolden);
  k = detail::mix64(k ^ (seed.stream + 0x85ebca77c2b2ae63ULL));
  k = detail::mix64(k ^ (trial + 0xc2b2ae3d27d4eb4fULL));
  k = detail::mix64(k ^ (column + 0x27d4eb2f165667c5ULL));
  return k;
}

// SplitMix64 sequence started at a derived key.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : state_(key) {}
  CounterRng(const Seed& seed, std::uint64_t trial, std::uint64_t column) noexcept
      : state_(cell_key(seed, trial, column)) {}

  std::uint64_t next_u64() noexcept {
    state_ += detail::kGolden;
    return detail::mix64(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() noexcept { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound); rejection keeps it exactly uniform.
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // +1.0 or -1.0 with equal probability.
  double next_sign() noexcept { return (next_u64() >> 63) ? 1.0 : -1.0; }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double next_normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 lies in (0, 1] so the log stays finite.
    const double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sjl
