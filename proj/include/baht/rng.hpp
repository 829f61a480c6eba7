#pragma once

#include <cstdint>

namespace baht {

// SplitMix64: counter-based 64-bit generator. Identical seeds give identical
// streams on every platform, which the reproducibility contract relies on.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Independent substream for item `index` of a run seeded with `seed`.
  static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mix(seed);
    std::uint64_t base = mix.next_u64();
    return SplitMix64(base + 0x9e3779b97f4a7c15ULL * (index + 1));
  }

 private:
  std::uint64_t state_;
};

}  // namespace baht
