#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "spinheat/errors.hpp"

namespace spinheat {

// Pascal-triangle table of binomial coefficients in exact 64-bit integers.
// Entries that would overflow are stored as a sentinel and trap on access,
// so a table can cover large n as long as nobody asks for the bad entries.
class BinomialTable {
 public:
  static constexpr std::uint64_t kOverflow =
      std::numeric_limits<std::uint64_t>::max();

  explicit BinomialTable(int max_n) : max_n_(max_n), c_(max_n + 1) {
    for (int n = 0; n <= max_n; ++n) {
      c_[n].assign(n + 1, 1);
      for (int k = 1; k < n; ++k) {
        const std::uint64_t a = c_[n - 1][k - 1];
        const std::uint64_t b = (k <= n - 1) ? c_[n - 1][k] : 0;
        if (a == kOverflow || b == kOverflow || a > kOverflow - b) {
          c_[n][k] = kOverflow;
        } else {
          c_[n][k] = a + b;
        }
      }
    }
  }

  // C(n, k); zero when k > n or either argument is negative.
  std::uint64_t choose(int n, int k) const {
    if (n < 0 || k < 0 || k > n) return 0;
    if (n > max_n_) throw config_error("binomial table too small");
    const std::uint64_t v = c_[n][k];
    if (v == kOverflow)
      throw resource_error("binomial coefficient overflows 64 bits");
    return v;
  }

  int max_n() const { return max_n_; }

 private:
  int max_n_;
  std::vector<std::vector<std::uint64_t>> c_;
};

// Colexicographic rank of a strictly increasing subset {s_0 < s_1 < ...}:
// rank = sum_k C(s_k, k+1).
inline std::uint64_t colex_rank(const BinomialTable& tab,
                                std::span<const int> subset) {
  std::uint64_t r = 0;
  for (std::size_t k = 0; k < subset.size(); ++k)
    r += tab.choose(subset[k], static_cast<int>(k) + 1);
  return r;
}

// Inverse of colex_rank for subsets of size n_pick drawn from [0, n_total).
inline void colex_unrank(const BinomialTable& tab, std::uint64_t rank,
                         int n_total, int n_pick, std::vector<int>& out) {
  out.resize(n_pick);
  int hi = n_total - 1;
  for (int k = n_pick; k >= 1; --k) {
    // largest c with C(c, k) <= rank
    int c = hi;
    while (c >= k - 1 && tab.choose(c, k) > rank) --c;
    out[k - 1] = c;
    rank -= tab.choose(c, k);
    hi = c - 1;
  }
}

// Advances a strictly increasing subset of [0, n_total) to its colex
// successor. Returns false when the input was the last subset.
inline bool colex_next(std::vector<int>& subset, int n_total) {
  const int n = static_cast<int>(subset.size());
  for (int k = 0; k < n; ++k) {
    const int limit = (k + 1 < n) ? subset[k + 1] : n_total;
    if (subset[k] + 1 < limit) {
      ++subset[k];
      for (int j = 0; j < k; ++j) subset[j] = j;
      return true;
    }
  }
  return false;
}

}  // namespace spinheat
