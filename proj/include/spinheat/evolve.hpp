#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "spinheat/errors.hpp"
#include "spinheat/magnon.hpp"

namespace spinheat {

enum class EvolveBackend { automatic, dense, krylov };

inline const char* to_string(EvolveBackend b) {
  switch (b) {
    case EvolveBackend::automatic: return "auto";
    case EvolveBackend::dense: return "dense";
    case EvolveBackend::krylov: return "krylov";
  }
  return "?";
}

struct KrylovOptions {
  double tolerance = 1e-10;  // a-posteriori Euclidean error target
  int max_subspace = 350;
};

namespace detail {

// Dense sector Hamiltonian, one subset-enumeration pass.
inline Eigen::MatrixXd dense_hamiltonian(const MagnonBasis& basis) {
  const Lattice& lat = basis.lattice();
  const Eigen::Index dim = basis.dimension();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<int> subset = basis.first_subset();
  std::vector<int> scratch;
  Eigen::Index idx = 0;
  do {
    for (auto [i, j] : lat.edges()) {
      const bool ui = std::binary_search(subset.begin(), subset.end(), i);
      const bool uj = std::binary_search(subset.begin(), subset.end(), j);
      if (ui == uj) continue;
      const auto partner = static_cast<Eigen::Index>(detail::rank_after_swap(
          basis.binomial(), subset, ui ? i : j, ui ? j : i, scratch));
      h(idx, idx) += 1.0;
      h(idx, partner) -= 1.0;
    }
    ++idx;
  } while (colex_next(subset, lat.site_count()));
  return h;
}

}  // namespace detail

// Action of exp(-mu H) on sector states. Dense spectral backend for small
// sectors (exact, one eigendecomposition reused across the whole mu grid);
// Lanczos with full reorthogonalization above the dense ceiling.
class SectorPropagator {
 public:
  static constexpr Eigen::Index kDefaultDenseCeiling = 4096;

  explicit SectorPropagator(std::shared_ptr<const MagnonBasis> basis,
                            EvolveBackend backend = EvolveBackend::automatic,
                            Eigen::Index dense_ceiling = kDefaultDenseCeiling,
                            KrylovOptions krylov = {})
      : basis_(std::move(basis)), krylov_(krylov) {
    dense_ = backend == EvolveBackend::dense ||
             (backend == EvolveBackend::automatic &&
              basis_->dimension() <= dense_ceiling);
    if (dense_) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
          detail::dense_hamiltonian(*basis_));
      if (solver.info() != Eigen::Success)
        throw std::runtime_error("sector eigensolve failed");
      eigenvalues_ = solver.eigenvalues();
      eigenvectors_ = solver.eigenvectors();
    }
  }

  const MagnonBasis& basis() const { return *basis_; }
  std::shared_ptr<const MagnonBasis> basis_ptr() const { return basis_; }
  bool is_dense() const { return dense_; }
  const KrylovOptions& krylov_options() const { return krylov_; }

  // Dense backend only: spectrum of the sector Hamiltonian, ascending.
  const Eigen::VectorXd& eigenvalues() const {
    if (!dense_) throw config_error("no spectrum on the Krylov backend");
    return eigenvalues_;
  }
  const Eigen::MatrixXd& eigenvectors() const {
    if (!dense_) throw config_error("no eigenbasis on the Krylov backend");
    return eigenvectors_;
  }

  SectorState apply_exp(const SectorState& a0, double mu) const {
    if (mu < 0) throw config_error("imaginary time must be nonnegative");
    if (!a0.basis().same_sector(*basis_))
      throw config_error("state belongs to a different sector");
    if (mu == 0.0) return a0;
    return dense_ ? dense_exp(a0, mu) : krylov_exp(a0, mu);
  }

 private:
  SectorState dense_exp(const SectorState& a0, double mu) const {
    Eigen::VectorXd modes = eigenvectors_.transpose() * a0.amplitudes();
    for (Eigen::Index k = 0; k < modes.size(); ++k)
      modes[k] *= std::exp(-mu * eigenvalues_[k]);
    return SectorState(a0.basis_ptr(), eigenvectors_ * modes);
  }

  // Lanczos approximation beta0 * V_m exp(-mu T_m) e1. The error is bounded
  // a posteriori by beta0 * beta_m * integral over [0, mu] of
  // |(exp(-s T_m))_{m,1}|, evaluated by quadrature in the Ritz basis; the
  // semigroup is a contraction, so the propagated remainder never grows.
  SectorState krylov_exp(const SectorState& a0, double mu) const {
    const Eigen::Index dim = basis_->dimension();
    const double beta0 = a0.norm();
    if (beta0 == 0.0)
      return SectorState(a0.basis_ptr(), Eigen::VectorXd::Zero(dim));

    const int m_max = std::min<Eigen::Index>(krylov_.max_subspace, dim);
    Eigen::MatrixXd v(dim, m_max);
    std::vector<double> alpha, beta;
    v.col(0) = a0.amplitudes() / beta0;

    const double breakdown = 1e-14;
    const int check_every = 5;
    int m = 0;
    bool exact = false;
    bool converged = false;
    while (m < m_max) {
      Eigen::VectorXd w =
          hamiltonian_apply(SectorState(a0.basis_ptr(), v.col(m)))
              .amplitudes();
      const double a = v.col(m).dot(w);
      alpha.push_back(a);
      w -= a * v.col(m);
      if (m > 0) w -= beta[m - 1] * v.col(m - 1);
      // full reorthogonalization pass
      w -= v.leftCols(m + 1) * (v.leftCols(m + 1).transpose() * w);
      const double b = w.norm();
      ++m;
      if (b < breakdown) {
        exact = true;  // invariant subspace; the projection is exact
        break;
      }
      if (m < m_max) v.col(m) = w / b;
      beta.push_back(b);
      if (m % check_every == 0 || m == m_max) {
        converged = exp_error_bound(alpha, beta, mu) * beta0 <=
                    krylov_.tolerance;
        if (converged) break;
      }
    }

    if (!exact && !converged)
      throw resource_error(
          "Krylov evolution did not reach tolerance at max subspace "
          "dimension");
    Eigen::VectorXd y = small_exp(alpha, beta, m, mu);
    return SectorState(a0.basis_ptr(), beta0 * (v.leftCols(m) * y));
  }

  // exp(-mu T_m) e1 for the tridiagonal Lanczos matrix.
  static Eigen::VectorXd small_exp(const std::vector<double>& alpha,
                                   const std::vector<double>& beta, int m,
                                   double mu) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      t(k, k) = alpha[k];
      if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    Eigen::VectorXd modes = es.eigenvectors().row(0).transpose();
    for (int k = 0; k < m; ++k)
      modes[k] *= std::exp(-mu * es.eigenvalues()[k]);
    return es.eigenvectors() * modes;
  }

  static double exp_error_bound(const std::vector<double>& alpha,
                                const std::vector<double>& beta, double mu) {
    const int m = static_cast<int>(alpha.size());
    if (m < 2) return std::numeric_limits<double>::infinity();
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      t(k, k) = alpha[k];
      if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::VectorXd first = es.eigenvectors().row(0);
    const Eigen::VectorXd last = es.eigenvectors().row(m - 1);

    // Simpson quadrature of |(exp(-s T))_{m,1}| over s in [0, mu].
    const int panels = 128;
    const double h = mu / panels;
    auto corner = [&](double s) {
      double val = 0.0;
      for (int k = 0; k < m; ++k)
        val += last[k] * first[k] * std::exp(-s * es.eigenvalues()[k]);
      return std::abs(val);
    };
    double integral = corner(0.0) + corner(mu);
    for (int p = 1; p < panels; ++p)
      integral += (p % 2 ? 4.0 : 2.0) * corner(p * h);
    integral *= h / 3.0;
    return beta[m - 1] * integral;
  }

  std::shared_ptr<const MagnonBasis> basis_;
  KrylovOptions krylov_;
  bool dense_ = false;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

inline SectorState evolve(const SectorPropagator& prop, const SectorState& a0,
                          double mu) {
  return prop.apply_exp(a0, mu);
}

}  // namespace spinheat
