#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace spinheat {

// Small deterministic generator (splitmix64). Pinned here so result files
// are reproducible independent of the standard library implementation.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

  double uniform01() { return (next() >> 11) * 0x1.0p-53; }

  bool coin() { return next() & 1; }

 private:
  std::uint64_t state_;
};

// Independent stream for task `index` of a seeded run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mix(seed ^ (0x517cc1b727220a95ull * (index + 1)));
  return mix.next();
}

// Uniformly random size-k subset of [0, n) via partial Fisher-Yates.
inline std::vector<int> random_subset(SplitMix64& rng, int n, int k) {
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace spinheat
