#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "spinheat/evolve.hpp"
#include "spinheat/heatfield.hpp"
#include "spinheat/magnon.hpp"

namespace spinheat {

struct BackendSettings {
  EvolveBackend backend = EvolveBackend::automatic;
  Eigen::Index dense_ceiling = SectorPropagator::kDefaultDenseCeiling;
  KrylovOptions krylov;
  std::uint64_t amplitude_ceiling = MagnonBasis::kDefaultAmplitudeCeiling;
};

// Per-lattice pool of sector propagators and the heat propagator, built
// lazily and shared across experiment grid points. Thread-safe; the cached
// objects are immutable once constructed.
class SectorCache {
 public:
  explicit SectorCache(std::shared_ptr<const Lattice> lattice,
                       BackendSettings settings = {})
      : lattice_(std::move(lattice)), settings_(settings) {}

  const Lattice& lattice() const { return *lattice_; }
  std::shared_ptr<const Lattice> lattice_ptr() const { return lattice_; }
  const BackendSettings& settings() const { return settings_; }

  std::shared_ptr<const MagnonBasis> basis(int n_up) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto& slot = bases_[n_up];
    if (!slot)
      slot = basis_build(lattice_, n_up, settings_.amplitude_ceiling);
    return slot;
  }

  std::shared_ptr<const SectorPropagator> propagator(int n_up) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto& slot = propagators_[n_up];
    if (!slot) {
      auto& basis_slot = bases_[n_up];
      if (!basis_slot)
        basis_slot = basis_build(lattice_, n_up, settings_.amplitude_ceiling);
      slot = std::make_shared<const SectorPropagator>(
          basis_slot, settings_.backend, settings_.dense_ceiling,
          settings_.krylov);
    }
    return slot;
  }

  std::shared_ptr<const HeatPropagator> heat() const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!heat_) heat_ = std::make_shared<const HeatPropagator>(lattice_);
    return heat_;
  }

 private:
  std::shared_ptr<const Lattice> lattice_;
  BackendSettings settings_;
  mutable std::mutex mutex_;
  mutable std::map<int, std::shared_ptr<const MagnonBasis>> bases_;
  mutable std::map<int, std::shared_ptr<const SectorPropagator>> propagators_;
  mutable std::shared_ptr<const HeatPropagator> heat_;
};

// The full pipeline behind every experiment: sharp state, imaginary-time
// evolution, normalized spin-up expectations.
inline SiteField evolved_expectation(const SectorCache& cache,
                                     const SpinConfig& s0, double mu) {
  const auto prop = cache.propagator(s0.n_up());
  const auto psi0 = sharp_state(prop->basis_ptr(), s0);
  return expectation_p(evolve(*prop, psi0, mu));
}

}  // namespace spinheat
