#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "spinheat/errors.hpp"
#include "spinheat/lattice.hpp"

namespace spinheat {
namespace fullspace {

// Vectors over the full 2^|L| spin space. Index bit i set = spin up at
// site i. Only sensible at small site counts; callers enforce their own
// ceilings.
inline void check_size(const Lattice& lat, int max_sites) {
  if (lat.site_count() > max_sites)
    throw config_error("lattice too large for a full-space computation");
}

// Tensor product of per-site spinors (up_i, down_i).
inline std::vector<double> product_vector(const std::vector<double>& up,
                                          const std::vector<double>& down) {
  const int n = static_cast<int>(up.size());
  std::vector<double> v(std::size_t{1} << n);
  v[0] = 1.0;
  std::size_t len = 1;
  for (int s = 0; s < n; ++s) {
    for (std::size_t b = 0; b < len; ++b) {
      v[b + len] = v[b] * up[s];
      v[b] *= down[s];
    }
    len <<= 1;
  }
  return v;
}

// H = -sum_{i~j} (swap_ij - 1) by explicit edge-swap application.
inline std::vector<double> hamiltonian_apply(const Lattice& lat,
                                             const std::vector<double>& v) {
  const std::size_t size = std::size_t{1} << lat.site_count();
  if (v.size() != size) throw config_error("full-space vector size mismatch");
  std::vector<double> out(size, 0.0);
  for (auto [i, j] : lat.edges()) {
    const std::uint64_t mask =
        (std::uint64_t{1} << i) | (std::uint64_t{1} << j);
    for (std::size_t b = 0; b < size; ++b) {
      const bool ui = (b >> i) & 1, uj = (b >> j) & 1;
      if (ui != uj) out[b] += v[b] - v[b ^ mask];
    }
  }
  return out;
}

// d/dmu of a product state whose factors depend on mu: sum over sites of
// the tensor product with that site's factor replaced by its derivative.
inline std::vector<double> product_derivative(
    const std::vector<double>& up, const std::vector<double>& down,
    const std::vector<double>& dup, const std::vector<double>& ddown) {
  const int n = static_cast<int>(up.size());
  std::vector<double> total(std::size_t{1} << n, 0.0);
  std::vector<double> u(up), d(down);
  for (int s = 0; s < n; ++s) {
    u[s] = dup[s];
    d[s] = ddown[s];
    const auto term = product_vector(u, d);
    for (std::size_t b = 0; b < total.size(); ++b) total[b] += term[b];
    u[s] = up[s];
    d[s] = down[s];
  }
  return total;
}

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace fullspace
}  // namespace spinheat
