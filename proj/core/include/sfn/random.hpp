#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sfn {

/// Seeded random source with a bit-exact, platform-independent recipe.
///
/// Raw bits come from std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. The distribution transforms are implemented here rather than
/// taken from <random>, because the standard distributions are allowed to
/// differ between library vendors:
///   - uniform01: top 53 bits of one draw scaled by 2^-53, in [0, 1).
///   - normal: Box-Muller on two uniform01 draws (1 - u1 guards log(0)); the
///     second variate of each pair is discarded so every call consumes
///     exactly two draws.
///   - index(n): rejection sampling on the largest multiple of n below 2^64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal(double mean = 0.0, double stddev = 1.0);

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Folds a list of stream coordinates (seed, step, candidate, ...) into one seed.
/// The result depends only on the values, never on call order elsewhere.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
  return h;
}

}  // namespace sfn
