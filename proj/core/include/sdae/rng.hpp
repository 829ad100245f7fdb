#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sdae {

// SplitMix64 finaliser. Used to derive independent seeds from (seed, salt).
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

// xoshiro256** seeded through SplitMix64. The draw sequence for a seed is fixed
// and platform independent; nothing here touches <random> distributions, whose
// output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() noexcept;

  // Uniform in [lo, hi). Throws ArgumentError unless lo < hi.
  double uniform(double lo, double hi);

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) noexcept { return next_unit() < p; }

  // Independent child generator; the parent stream is not advanced.
  Rng split(std::uint64_t stream) const noexcept { return Rng(derive_seed(seed_, stream)); }

  // Fisher-Yates, driven by below().
  template <typename T>
  void shuffle(std::span<T> xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
};

// 0, 1, ..., n-1 in a seeded random order.
std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

}  // namespace sdae
