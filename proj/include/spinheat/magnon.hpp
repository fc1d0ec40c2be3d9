#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "spinheat/binomial.hpp"
#include "spinheat/errors.hpp"
#include "spinheat/lattice.hpp"
#include "spinheat/spin_config.hpp"

namespace spinheat {

// Fixed-magnon-number sector of the spin-1/2 Hilbert space. A state with
// n_up up spins is stored as one real amplitude per n_up-subset of sites,
// indexed by colexicographic rank.
class MagnonBasis {
 public:
  static constexpr std::uint64_t kDefaultAmplitudeCeiling = 1ull << 27;

  MagnonBasis(std::shared_ptr<const Lattice> lattice, int n_up,
              std::uint64_t amplitude_ceiling = kDefaultAmplitudeCeiling)
      : lattice_(std::move(lattice)),
        n_up_(n_up),
        ceiling_(amplitude_ceiling),
        binom_(lattice_->site_count()) {
    const int sites = lattice_->site_count();
    if (n_up < 0 || n_up > sites)
      throw config_error("magnon number out of range");
    const std::uint64_t dim = binom_.choose(sites, n_up);
    if (dim > ceiling_)
      throw resource_error("sector dimension exceeds the amplitude ceiling");
    dimension_ = static_cast<Eigen::Index>(dim);
  }

  const Lattice& lattice() const { return *lattice_; }
  std::shared_ptr<const Lattice> lattice_ptr() const { return lattice_; }
  int n_up() const { return n_up_; }
  Eigen::Index dimension() const { return dimension_; }
  std::uint64_t amplitude_ceiling() const { return ceiling_; }
  const BinomialTable& binomial() const { return binom_; }

  std::uint64_t rank(std::span<const int> subset) const {
    return colex_rank(binom_, subset);
  }

  std::vector<int> unrank(std::uint64_t index) const {
    std::vector<int> subset;
    colex_unrank(binom_, index, lattice_->site_count(), n_up_, subset);
    return subset;
  }

  // First subset in colex order; advance with colex_next.
  std::vector<int> first_subset() const {
    std::vector<int> subset(n_up_);
    for (int k = 0; k < n_up_; ++k) subset[k] = k;
    return subset;
  }

  bool same_sector(const MagnonBasis& other) const {
    return lattice_.get() == other.lattice_.get() && n_up_ == other.n_up_;
  }

 private:
  std::shared_ptr<const Lattice> lattice_;
  int n_up_;
  std::uint64_t ceiling_;
  BinomialTable binom_;
  Eigen::Index dimension_;
};

inline std::shared_ptr<const MagnonBasis> basis_build(
    std::shared_ptr<const Lattice> lattice, int n_up,
    std::uint64_t amplitude_ceiling = MagnonBasis::kDefaultAmplitudeCeiling) {
  return std::make_shared<const MagnonBasis>(std::move(lattice), n_up,
                                             amplitude_ceiling);
}

// Amplitude vector over the subsets of one magnon sector. Amplitudes are
// real throughout: sharp states are real and the Hamiltonian is a real
// symmetric matrix in this basis.
class SectorState {
 public:
  SectorState(std::shared_ptr<const MagnonBasis> basis,
              Eigen::VectorXd amplitudes)
      : basis_(std::move(basis)), amp_(std::move(amplitudes)) {
    if (amp_.size() != basis_->dimension())
      throw config_error("amplitude count does not match sector dimension");
    if (!amp_.allFinite())
      throw config_error("non-finite amplitude in sector state");
  }

  const MagnonBasis& basis() const { return *basis_; }
  std::shared_ptr<const MagnonBasis> basis_ptr() const { return basis_; }
  const Eigen::VectorXd& amplitudes() const { return amp_; }
  double norm() const { return amp_.norm(); }

 private:
  std::shared_ptr<const MagnonBasis> basis_;
  Eigen::VectorXd amp_;
};

// The sharp product state with up spins exactly on s0.
inline SectorState sharp_state(std::shared_ptr<const MagnonBasis> basis,
                               const SpinConfig& s0) {
  if (&basis->lattice() != &s0.lattice() || basis->n_up() != s0.n_up())
    throw config_error("spin configuration does not match basis sector");
  Eigen::VectorXd amp = Eigen::VectorXd::Zero(basis->dimension());
  amp[static_cast<Eigen::Index>(basis->rank(s0.up_set()))] = 1.0;
  return SectorState(std::move(basis), std::move(amp));
}

namespace detail {

// Rank of (subset \ {out_site}) u {in_site}, subset kept sorted.
inline std::uint64_t rank_after_swap(const BinomialTable& binom,
                                     const std::vector<int>& subset,
                                     int out_site, int in_site,
                                     std::vector<int>& scratch) {
  scratch.clear();
  for (int s : subset)
    if (s != out_site) scratch.push_back(s);
  scratch.insert(std::lower_bound(scratch.begin(), scratch.end(), in_site),
                 in_site);
  return colex_rank(binom, scratch);
}

}  // namespace detail

// Ferromagnetic Heisenberg Hamiltonian H = -sum_{i~j} (swap_ij - 1) acting
// on subset amplitudes: (Ha)(S) = sum over edges (i,j) cut by S of
// [a(S) - a(S xor {i,j})]. Symmetric and positive semidefinite; the fully
// aligned states are annihilated.
inline SectorState hamiltonian_apply(const SectorState& state) {
  const MagnonBasis& basis = state.basis();
  const Lattice& lat = basis.lattice();
  const auto& a = state.amplitudes();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.size());

  std::vector<int> subset = basis.first_subset();
  std::vector<int> scratch;
  scratch.reserve(subset.size());
  const int sites = lat.site_count();
  Eigen::Index idx = 0;
  if (basis.dimension() > 0) {
    do {
      for (auto [i, j] : lat.edges()) {
        const bool ui = std::binary_search(subset.begin(), subset.end(), i);
        const bool uj = std::binary_search(subset.begin(), subset.end(), j);
        if (ui == uj) continue;
        const auto partner = detail::rank_after_swap(
            basis.binomial(), subset, ui ? i : j, ui ? j : i, scratch);
        out[idx] += a[idx] - a[static_cast<Eigen::Index>(partner)];
      }
      ++idx;
    } while (colex_next(subset, sites));
  }
  return SectorState(state.basis_ptr(), std::move(out));
}

// Normalized per-site spin-up expectation: sum_{S containing i} a(S)^2
// over sum_S a(S)^2. Values lie in [0,1] and sum to the magnon number.
inline SiteField expectation_p(const SectorState& state) {
  const MagnonBasis& basis = state.basis();
  const auto& a = state.amplitudes();
  const double total = a.squaredNorm();
  if (total <= 0.0) throw config_error("zero-norm state has no expectations");

  SiteField acc(basis.lattice().site_count(), 0.0);
  std::vector<int> subset = basis.first_subset();
  Eigen::Index idx = 0;
  do {
    const double w = a[idx] * a[idx];
    if (w != 0.0)
      for (int s : subset) acc[s] += w;
    ++idx;
  } while (colex_next(subset, basis.lattice().site_count()));
  for (double& v : acc) v /= total;
  return acc;
}

// One-magnon shadow field phi(i) = sum_{S containing i} a(S); for a sharp
// state this is the indicator of its up-set.
inline SiteField project_field(const SectorState& state) {
  const MagnonBasis& basis = state.basis();
  if (basis.n_up() < 1)
    throw config_error("one-magnon projection needs at least one up spin");
  const auto& a = state.amplitudes();
  SiteField field(basis.lattice().site_count(), 0.0);
  std::vector<int> subset = basis.first_subset();
  Eigen::Index idx = 0;
  do {
    const double v = a[idx];
    if (v != 0.0)
      for (int s : subset) field[s] += v;
    ++idx;
  } while (colex_next(subset, basis.lattice().site_count()));
  return field;
}

// Sector-lowering map to m up spins: b(T) = (1/C(N,m)) sum_{S containing T}
// a(S). Intertwines the sector Hamiltonians; m = N is the identity.
inline SectorState project_sector(const SectorState& state, int m) {
  const MagnonBasis& basis = state.basis();
  const int n = basis.n_up();
  if (m < 1 || m > n) throw config_error("projection target out of range");
  if (m == n) return state;

  auto target = basis_build(basis.lattice_ptr(), m, basis.amplitude_ceiling());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(target->dimension());
  const auto& a = state.amplitudes();

  std::vector<int> subset = basis.first_subset();
  std::vector<int> pick(m);   // positions within the subset
  std::vector<int> sub(m);    // the selected sites
  Eigen::Index idx = 0;
  do {
    const double v = a[idx];
    if (v != 0.0) {
      for (int k = 0; k < m; ++k) pick[k] = k;
      do {
        for (int k = 0; k < m; ++k) sub[k] = subset[pick[k]];
        out[static_cast<Eigen::Index>(target->rank(sub))] += v;
      } while (colex_next(pick, n));
    }
    ++idx;
  } while (colex_next(subset, basis.lattice().site_count()));

  out /= static_cast<double>(basis.binomial().choose(n, m));
  return SectorState(std::move(target), std::move(out));
}

// Global spin flip: maps the N-magnon sector to the (|L|-N)-magnon sector
// by b(S) = a(complement of S). An involution commuting with H.
inline SectorState q_flip(const SectorState& state) {
  const MagnonBasis& basis = state.basis();
  const int sites = basis.lattice().site_count();
  auto target = basis_build(basis.lattice_ptr(), sites - basis.n_up(),
                            basis.amplitude_ceiling());
  Eigen::VectorXd out(target->dimension());
  const auto& a = state.amplitudes();

  std::vector<int> subset = basis.first_subset();
  std::vector<int> comp;
  comp.reserve(sites - basis.n_up());
  Eigen::Index idx = 0;
  do {
    comp.clear();
    auto it = subset.begin();
    for (int s = 0; s < sites; ++s) {
      if (it != subset.end() && *it == s)
        ++it;
      else
        comp.push_back(s);
    }
    out[static_cast<Eigen::Index>(target->rank(comp))] = a[idx];
    ++idx;
  } while (colex_next(subset, sites));
  return SectorState(std::move(target), std::move(out));
}

}  // namespace spinheat
