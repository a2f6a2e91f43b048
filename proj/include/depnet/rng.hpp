#pragma once

#include <cstdint>

namespace depnet {

/// SplitMix64 generator. Used both directly and to derive independent
/// streams from one top-level seed; std:: distributions are avoided because
/// their output is implementation-defined and every run must be reproducible
/// bit for bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n) by rejection; exact for any n > 0.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t threshold = (0ULL - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Uniform double in [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

 private:
  std::uint64_t state_;
};

/// Derives the seed of a named sub-stream from a top-level seed. Streams are
/// labeled by purpose so adding a consumer never shifts another consumer's
/// sequence.
inline std::uint64_t derive_seed(std::uint64_t top_seed, std::uint64_t stream_id) {
  SplitMix64 mix(top_seed ^ (0x6a09e667f3bcc909ULL + stream_id * 0x3c6ef372fe94f82bULL));
  return mix.next_u64();
}

}  // namespace depnet
