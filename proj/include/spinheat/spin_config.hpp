#pragma once

#include <algorithm>
#include <memory>
#include <utility>
#include <vector>

#include "spinheat/errors.hpp"
#include "spinheat/lattice.hpp"

namespace spinheat {

// The set of up-spin sites defining a sharp product state.
class SpinConfig {
 public:
  SpinConfig(std::shared_ptr<const Lattice> lattice, std::vector<int> up_set)
      : lattice_(std::move(lattice)), up_(std::move(up_set)) {
    std::sort(up_.begin(), up_.end());
    for (std::size_t k = 0; k < up_.size(); ++k) {
      lattice_->check_site(up_[k]);
      if (k > 0 && up_[k] == up_[k - 1])
        throw config_error("duplicate site in spin configuration");
    }
  }

  const Lattice& lattice() const { return *lattice_; }
  std::shared_ptr<const Lattice> lattice_ptr() const { return lattice_; }
  const std::vector<int>& up_set() const { return up_; }
  int n_up() const { return static_cast<int>(up_.size()); }

  bool is_up(int site) const {
    return std::binary_search(up_.begin(), up_.end(), site);
  }

  // 0/1 occupation field (the field-level image of this configuration).
  SiteField indicator() const {
    SiteField f(lattice_->site_count(), 0.0);
    for (int s : up_) f[s] = 1.0;
    return f;
  }

  SpinConfig complement() const {
    std::vector<int> down;
    down.reserve(lattice_->site_count() - n_up());
    for (int s = 0; s < lattice_->site_count(); ++s)
      if (!is_up(s)) down.push_back(s);
    return SpinConfig(lattice_, std::move(down));
  }

  SpinConfig translated(int axis, int amount) const {
    std::vector<int> moved;
    moved.reserve(up_.size());
    for (int s : up_) moved.push_back(lattice_->translate(s, axis, amount));
    return SpinConfig(lattice_, std::move(moved));
  }

 private:
  std::shared_ptr<const Lattice> lattice_;
  std::vector<int> up_;  // sorted, distinct
};

}  // namespace spinheat
