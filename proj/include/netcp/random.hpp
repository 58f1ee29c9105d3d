#pragma once

// Counter-based random numbers: every draw is a pure function of a key tuple,
// so streams can be generated in any order (or in parallel) and stay
// bit-identical for a given seed.

#include <cstdint>
#include <initializer_list>

namespace netcp {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hashes a seed and a list of counters into one 64-bit word.
constexpr std::uint64_t hash_key(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t c : counters) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Keyed generator. `uniform(...)` never advances state; `next()` walks a
/// private counter for sequential use (shuffles).
class CounterRng {
 public:
  constexpr explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  constexpr double uniform(std::initializer_list<std::uint64_t> key) const {
    return to_unit(hash_key(seed_, key));
  }
  constexpr std::uint64_t bits(std::initializer_list<std::uint64_t> key) const {
    return hash_key(seed_, key);
  }
  constexpr std::uint64_t next() { return hash_key(seed_, {0xffffffffULL, counter_++}); }
  constexpr double next_unit() { return to_unit(next()); }

  constexpr std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Seed for child stream `index` of `root` (repetitions, permutations).
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t domain, std::uint64_t index) {
  return hash_key(root, {domain, index});
}

}  // namespace netcp
