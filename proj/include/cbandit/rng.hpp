#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cbandit {

/// SplitMix64 finalizer. Used for every seed derivation in the project.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a tuple of fields into one 64-bit seed: h = mix(h ^ mix(field)).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> fields) noexcept {
  std::uint64_t h = mix64(base);
  for (std::uint64_t f : fields) h = mix64(h ^ mix64(f));
  return h;
}

/// Seedable, splittable random stream. Every stochastic operation in the
/// library takes one explicitly; nothing reads global state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent child stream keyed by `stream`; does not advance *this.
  Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, {stream})); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace cbandit
