#pragma once

#include <cstdint>
#include <limits>

namespace sattn {

using Seed = std::uint64_t;

/// SplitMix64 finalizer (Steele, Lea & Flood). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child seed for the (layer, step) stream under `root`.
///
///   h = mix64(root + 0x9E3779B97F4A7C15)
///   h = mix64(h ^ mix64(layer + 0xD1B54A32D192ED03))
///   h = mix64(h ^ mix64(step  + 0x8CB92BA72F3D8DD7))
///
/// Every step is a bijection in its fresh argument, so for a fixed root and
/// layer distinct steps never collide (and likewise for layers at a fixed step).
constexpr Seed derive_seed(Seed root, std::uint64_t layer, std::uint64_t step) noexcept {
  std::uint64_t h = mix64(root + 0x9E3779B97F4A7C15ULL);
  h = mix64(h ^ mix64(layer + 0xD1B54A32D192ED03ULL));
  h = mix64(h ^ mix64(step + 0x8CB92BA72F3D8DD7ULL));
  return h;
}

/// xoshiro256** seeded through SplitMix64. The full algorithm is written out in
/// README.md so other languages can reproduce the streams bit for bit.
///
/// Satisfies std::uniform_random_bit_generator, but the members below should be
/// preferred: the std distributions are implementation-defined and therefore
/// not reproducible across standard libraries.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(Seed root) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, bound) by Lemire's multiply-and-reject; bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept;

  /// Uniform on [0, 1) with 53 random mantissa bits.
  double uniform01() noexcept;

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  Seed root_seed() const noexcept { return root_; }

  /// Independent stream derive_seed(root_seed(), layer, step).
  SeededRng child(std::uint64_t layer, std::uint64_t step) const noexcept {
    return SeededRng(derive_seed(root_, layer, step));
  }

 private:
  Seed root_;
  std::uint64_t s_[4];
};

}  // namespace sattn
