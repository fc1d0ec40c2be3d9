#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <utility>

#include "spinheat/errors.hpp"
#include "spinheat/lattice.hpp"
#include "spinheat/spin_config.hpp"

namespace spinheat {

// Spectral solver for the lattice heat equation. The Laplacian of a
// connected graph is negative semidefinite with a simple eigenvalue 0
// (constant eigenvector); the eigendecomposition is computed once per
// lattice and reused for every diffusion time.
class HeatPropagator {
 public:
  explicit HeatPropagator(std::shared_ptr<const Lattice> lattice)
      : lattice_(std::move(lattice)) {
    const int n = lattice_->site_count();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (auto [a, b] : lattice_->edges()) {
      lap(a, b) += 1.0;
      lap(b, a) += 1.0;
      lap(a, a) -= 1.0;
      lap(b, b) -= 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("Laplacian eigensolve failed");
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
  }

  const Lattice& lattice() const { return *lattice_; }
  std::shared_ptr<const Lattice> lattice_ptr() const { return lattice_; }

  // Ascending; the last entry is the zero mode.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }

  // exp(mu * Delta) applied to an arbitrary field. Zero time returns the
  // input verbatim, keeping mu = 0 identities exact.
  SiteField propagate(const SiteField& f, double mu) const {
    if (mu < 0) throw config_error("diffusion time must be nonnegative");
    if (static_cast<int>(f.size()) != lattice_->site_count())
      throw config_error("field length does not match lattice");
    if (mu == 0.0) return f;
    const Eigen::Map<const Eigen::VectorXd> v(f.data(), f.size());
    Eigen::VectorXd modes = eigenvectors_.transpose() * v;
    for (int k = 0; k < modes.size(); ++k)
      modes[k] *= std::exp(mu * eigenvalues_[k]);
    Eigen::VectorXd out = eigenvectors_ * modes;
    return SiteField(out.data(), out.data() + out.size());
  }

 private:
  std::shared_ptr<const Lattice> lattice_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

// Heat flow from the 0/1 indicator of the up-set.
inline SiteField heat_solve(const HeatPropagator& prop, const SpinConfig& s0,
                            double mu) {
  if (&prop.lattice() != &s0.lattice())
    throw config_error("spin configuration belongs to a different lattice");
  return prop.propagate(s0.indicator(), mu);
}

// Pointwise x -> x^2 / (x^2 + (1-x)^2); maps [0,1] into [0,1] and
// satisfies rho(x) + rho(1-x) = 1.
inline double rho_scalar(double x) {
  const double a = x * x;
  const double b = (1.0 - x) * (1.0 - x);
  return a / (a + b);
}

inline SiteField rho_transform(const SiteField& phi) {
  SiteField out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] = rho_scalar(phi[i]);
  return out;
}

// Sup-site absolute difference.
inline double field_gap(const SiteField& a, const SiteField& b) {
  if (a.size() != b.size()) throw config_error("field length mismatch");
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    gap = std::max(gap, std::abs(a[i] - b[i]));
  return gap;
}

// Pointwise 1 - f, the field-level image of the global spin flip.
inline SiteField flip_field(const SiteField& f) {
  SiteField out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = 1.0 - f[i];
  return out;
}

}  // namespace spinheat
