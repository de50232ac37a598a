#ifndef TWOVIEW_RNG_HPP_
#define TWOVIEW_RNG_HPP_

#include <cstdint>

namespace twoview {

// Counter-based generator (splitmix64 finalizer over key+counter). Every
// draw is a pure function of (seed, counter), so results are identical
// across platforms and independent of how calls interleave with other
// generator instances. Gaussian deviates use an Irwin-Hall 12-sum instead
// of Box-Muller: it needs no transcendental libm calls, which keeps the
// bit pattern stable across C libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + 0x9e3779b97f4a7c15ull * ++counter_;
    return mix(z);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased (rejection on the top range).
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Approximately standard normal (Irwin-Hall, truncated to +-6).
  double gaussian() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform();
    return s - 6.0;
  }

  /// Independent derived seed for a named sub-stream.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed ^ 0xd1b54a32d192ed03ull) + stream);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace twoview

#endif  // TWOVIEW_RNG_HPP_
