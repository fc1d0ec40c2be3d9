#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "spinheat/cache.hpp"
#include "spinheat/errors.hpp"
#include "spinheat/fullspace.hpp"
#include "spinheat/heatfield.hpp"
#include "spinheat/parallel.hpp"
#include "spinheat/rng.hpp"

namespace spinheat {

// ---------------------------------------------------------------------------
// Gap sweeps: exact spin expectations against the three heat-kernel
// approximants, sup-site gaps per diffusion time.
// ---------------------------------------------------------------------------

struct GapReport {
  LatticeSpec lattice;
  std::vector<int> s0;
  std::vector<double> mu_grid;

  // per-mu site profiles
  std::vector<SiteField> p_exact;   // <p_i> in the evolved state
  std::vector<SiteField> phi;       // heat flow at mu
  std::vector<SiteField> rho;       // rho transform of phi
  std::vector<SiteField> phi_half;  // heat flow at mu/2

  // per-mu sup gaps
  std::vector<double> gap_rho;       // |<p> - rho|_inf
  std::vector<double> gap_phi;       // |<p> - phi|_inf
  std::vector<double> gap_phi_half;  // |<p> - phi_{mu/2}|_inf

  double max_gap_rho = 0.0;
  double max_gap_phi = 0.0;
  double max_gap_phi_half = 0.0;
  // restricted to mu >= 4, where phi_{mu/2} is claimed to be accurate
  double max_gap_phi_half_late = 0.0;
};

inline GapReport gap_sweep(const SectorCache& cache, const SpinConfig& s0,
                           const std::vector<double>& mu_grid,
                           unsigned threads = 0) {
  if (mu_grid.empty()) throw config_error("mu grid is empty");
  for (std::size_t k = 0; k < mu_grid.size(); ++k) {
    if (mu_grid[k] < 0) throw config_error("mu grid must be nonnegative");
    if (k > 0 && mu_grid[k] <= mu_grid[k - 1])
      throw config_error("mu grid must be ascending");
  }

  GapReport report;
  report.lattice = cache.lattice().spec();
  report.s0 = s0.up_set();
  report.mu_grid = mu_grid;
  const std::size_t n = mu_grid.size();
  report.p_exact.resize(n);
  report.phi.resize(n);
  report.rho.resize(n);
  report.phi_half.resize(n);
  report.gap_rho.resize(n);
  report.gap_phi.resize(n);
  report.gap_phi_half.resize(n);

  // Propagators are built once up front so grid points share them.
  const auto heat = cache.heat();
  cache.propagator(s0.n_up());

  parallel_for(
      n,
      [&](std::size_t k) {
        const double mu = mu_grid[k];
        report.p_exact[k] = evolved_expectation(cache, s0, mu);
        report.phi[k] = heat_solve(*heat, s0, mu);
        report.rho[k] = rho_transform(report.phi[k]);
        report.phi_half[k] = heat_solve(*heat, s0, mu / 2.0);
        report.gap_rho[k] = field_gap(report.p_exact[k], report.rho[k]);
        report.gap_phi[k] = field_gap(report.p_exact[k], report.phi[k]);
        report.gap_phi_half[k] =
            field_gap(report.p_exact[k], report.phi_half[k]);
      },
      threads);

  for (std::size_t k = 0; k < n; ++k) {
    report.max_gap_rho = std::max(report.max_gap_rho, report.gap_rho[k]);
    report.max_gap_phi = std::max(report.max_gap_phi, report.gap_phi[k]);
    report.max_gap_phi_half =
        std::max(report.max_gap_phi_half, report.gap_phi_half[k]);
    if (mu_grid[k] >= 4.0)
      report.max_gap_phi_half_late =
          std::max(report.max_gap_phi_half_late, report.gap_phi_half[k]);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Small-mu vanishing rate of the rho gap.
// ---------------------------------------------------------------------------

struct RateFit {
  LatticeSpec lattice;
  std::vector<int> s0;
  std::vector<double> mu;     // geometric grid, strictly decreasing
  std::vector<double> gap;    // rho gap per sample
  std::vector<double> ratio;  // gap / mu
  std::vector<bool> excluded;  // numerically zero, left out of the fit

  static constexpr double kZeroFloor = 1e-13;

  bool identically_zero = false;  // every sample below the floor
  bool fit_valid = false;         // at least two included samples
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  int included_count = 0;
};

inline RateFit small_mu_rate(const SectorCache& cache, const SpinConfig& s0,
                             double mu_min, double mu_max, int points,
                             unsigned threads = 0) {
  if (!(0 < mu_min && mu_min < mu_max))
    throw config_error("need 0 < mu_min < mu_max");
  if (points < 4) throw config_error("rate fit needs at least 4 points");

  RateFit fit;
  fit.lattice = cache.lattice().spec();
  fit.s0 = s0.up_set();
  fit.mu.resize(points);
  const double ratio_step =
      std::pow(mu_min / mu_max, 1.0 / (points - 1));
  for (int k = 0; k < points; ++k)
    fit.mu[k] = mu_max * std::pow(ratio_step, k);
  fit.mu.back() = mu_min;

  fit.gap.resize(points);
  const auto heat = cache.heat();
  cache.propagator(s0.n_up());
  parallel_for(
      points,
      [&](std::size_t k) {
        const double mu = fit.mu[k];
        const SiteField p = evolved_expectation(cache, s0, mu);
        const SiteField r = rho_transform(heat_solve(*heat, s0, mu));
        fit.gap[k] = field_gap(p, r);
      },
      threads);

  fit.ratio.resize(points);
  fit.excluded.resize(points);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < points; ++k) {
    fit.ratio[k] = fit.gap[k] / fit.mu[k];
    fit.excluded[k] = fit.gap[k] < RateFit::kZeroFloor;
    if (fit.excluded[k]) continue;
    ++fit.included_count;
    const double x = std::log(fit.mu[k]);
    const double y = std::log(fit.gap[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.identically_zero = fit.included_count == 0;
  if (fit.included_count >= 2) {
    const double n = fit.included_count;
    const double denom = n * sxx - sx * sx;
    if (denom != 0.0) {
      fit.slope = (n * sxy - sx * sy) / denom;
      fit.intercept = (sy - fit.slope * sx) / n;
      fit.fit_valid = true;
    }
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Locality probe: how much exterior spin changes can move one site's
// expectation. Sampled lower bound on the true influence.
// ---------------------------------------------------------------------------

struct LocalityRow {
  int radius = 0;
  int exterior_size = 0;
  std::uint64_t evaluations = 0;  // modified configurations evaluated
  bool exhaustive = false;        // every exterior configuration visited
  double influence = 0.0;         // max |delta <p_site>| observed
};

struct LocalityReport {
  LatticeSpec lattice;
  std::vector<int> s0;
  int site = 0;
  double mu = 0.0;
  std::uint64_t seed = 0;
  int samples_requested = 0;
  double baseline = 0.0;  // <p_site> for the unmodified configuration
  std::vector<LocalityRow> rows;  // ascending radius
};

inline LocalityReport locality_probe(const SectorCache& cache,
                                     const SpinConfig& s0, int site, double mu,
                                     std::vector<int> radii, int samples,
                                     std::uint64_t seed,
                                     unsigned threads = 0) {
  const Lattice& lat = cache.lattice();
  lat.check_site(site);
  if (radii.empty()) throw config_error("radius list is empty");
  if (samples < 1) throw config_error("need at least one sample per radius");
  for (int r : radii)
    if (r < 0) throw config_error("radii must be nonnegative");

  LocalityReport report;
  report.lattice = lat.spec();
  report.s0 = s0.up_set();
  report.site = site;
  report.mu = mu;
  report.seed = seed;
  report.samples_requested = samples;
  report.baseline = evolved_expectation(cache, s0, mu)[site];

  const auto dist = distances_from(lat, site);
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  // Descending radii: every modification admissible at a larger radius is
  // admissible at a smaller one, so the running maximum keeps the reported
  // influence monotone in the radius.
  double running_max = 0.0;
  std::vector<LocalityRow> rows;
  for (auto it = radii.rbegin(); it != radii.rend(); ++it) {
    const int radius = *it;
    std::vector<int> exterior;
    for (int s = 0; s < lat.site_count(); ++s)
      if (dist[s] > radius) exterior.push_back(s);

    LocalityRow row;
    row.radius = radius;
    row.exterior_size = static_cast<int>(exterior.size());

    // The up-set outside the exterior is frozen at s0's values.
    std::vector<int> interior_ups;
    for (int s : s0.up_set())
      if (dist[s] <= radius) interior_ups.push_back(s);

    std::vector<std::vector<int>> mods;  // exterior up-assignments
    if (!exterior.empty()) {
      const int ext = row.exterior_size;
      if (ext < 63 && (std::uint64_t{1} << ext) <= std::uint64_t(samples) + 1) {
        row.exhaustive = true;
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << ext);
             ++bits) {
          std::vector<int> ups;
          for (int b = 0; b < ext; ++b)
            if ((bits >> b) & 1) ups.push_back(exterior[b]);
          mods.push_back(std::move(ups));
        }
      } else {
        // flip-all-exterior first, then seeded random assignments
        std::vector<int> flipped;
        for (int s : exterior)
          if (!s0.is_up(s)) flipped.push_back(s);
        mods.push_back(std::move(flipped));
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(radius)));
        for (int k = 0; k < samples; ++k) {
          std::vector<int> ups;
          for (int s : exterior)
            if (rng.coin()) ups.push_back(s);
          mods.push_back(std::move(ups));
        }
      }
    }

    row.evaluations = mods.size();
    std::vector<double> shifted(mods.size());
    parallel_for(
        mods.size(),
        [&](std::size_t k) {
          std::vector<int> ups = interior_ups;
          ups.insert(ups.end(), mods[k].begin(), mods[k].end());
          const SpinConfig modified(cache.lattice_ptr(), std::move(ups));
          shifted[k] = evolved_expectation(cache, modified, mu)[site];
        },
        threads);
    for (double v : shifted)
      running_max = std::max(running_max, std::abs(v - report.baseline));

    row.influence = running_max;
    rows.push_back(row);
  }

  report.rows.assign(rows.rbegin(), rows.rend());
  return report;
}

// ---------------------------------------------------------------------------
// Average-field product state and its consistency checks.
// ---------------------------------------------------------------------------

// Unnormalized per-site spinor product with components (f(i), 1 - f(i)).
class ProductState {
 public:
  ProductState(std::shared_ptr<const Lattice> lattice, const SiteField& f)
      : lattice_(std::move(lattice)), up_(f), down_(flip_field(f)) {
    if (static_cast<int>(f.size()) != lattice_->site_count())
      throw config_error("field length does not match lattice");
    for (double v : f)
      if (!std::isfinite(v)) throw config_error("non-finite field value");
  }

  const Lattice& lattice() const { return *lattice_; }
  const SiteField& up() const { return up_; }
  const SiteField& down() const { return down_; }

  double squared_norm() const {
    double p = 1.0;
    for (std::size_t i = 0; i < up_.size(); ++i)
      p *= up_[i] * up_[i] + down_[i] * down_[i];
    return p;
  }

 private:
  std::shared_ptr<const Lattice> lattice_;
  SiteField up_, down_;
};

inline ProductState average_field_state(
    std::shared_ptr<const Lattice> lattice, const SiteField& phi) {
  return ProductState(std::move(lattice), phi);
}

// Normalized spin-up probabilities of the product state. The tensor
// factors away from site i cancel between numerator and denominator,
// leaving the per-site ratio u_i^2 / (u_i^2 + v_i^2). With v = 1 - u this
// is the rho transform evaluated on the stored components. A zero factor
// norm would need u_i^2 + v_i^2 = 0, impossible for real u_i, v_i = 1-u_i.
inline SiteField product_expectation(const ProductState& ps) {
  const SiteField& u = ps.up();
  const SiteField& v = ps.down();
  SiteField out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double uu = u[i] * u[i];
    const double vv = v[i] * v[i];
    if (uu + vv == 0.0) throw config_error("zero-norm product state");
    out[i] = uu / (uu + vv);
  }
  return out;
}

// Residual of the imaginary-time flow equation on the average-field state:
// || d(psi)/dmu + H psi || relative to max(||H psi||, ||d(psi)/dmu||),
// with d(phi)/dmu supplied by the lattice heat equation. Materializes the
// full 2^|L| space.
inline double average_field_residual(const Lattice& lat,
                                     const SiteField& phi) {
  fullspace::check_size(lat, 20);
  if (static_cast<int>(phi.size()) != lat.site_count())
    throw config_error("field length does not match lattice");

  const SiteField up = phi;
  const SiteField down = flip_field(phi);
  const SiteField dphi = laplacian_apply(lat, phi);
  SiteField ddown(dphi.size());
  for (std::size_t i = 0; i < dphi.size(); ++i) ddown[i] = -dphi[i];

  const auto psi = fullspace::product_vector(up, down);
  const auto dpsi = fullspace::product_derivative(up, down, dphi, ddown);
  const auto hpsi = fullspace::hamiltonian_apply(lat, psi);

  std::vector<double> defect(psi.size());
  for (std::size_t b = 0; b < psi.size(); ++b) defect[b] = dpsi[b] + hpsi[b];

  // Vanishing norms are read relative to the state scale: when the factors
  // are identical the swap terms cancel only up to reassociation roundoff.
  const double scale =
      std::max(fullspace::norm(hpsi), fullspace::norm(dpsi));
  if (scale <= 1e-11 * fullspace::norm(psi)) return 0.0;
  return fullspace::norm(defect) / scale;
}

// ---------------------------------------------------------------------------
// The universal |x - rho(x)| bound on [0, 1].
// ---------------------------------------------------------------------------

struct BoundScanResult {
  double max_gap = 0.0;
  double argmax = 0.0;
};

inline BoundScanResult bound_scan(double step) {
  if (!(step > 0.0) || step > 1e-3)
    throw config_error("scan step must lie in (0, 1e-3]");
  const auto gap = [](double x) { return std::abs(x - rho_scalar(x)); };

  double best_x = 0.0, best = 0.0;
  const auto count = static_cast<std::size_t>(std::ceil(1.0 / step));
  for (std::size_t k = 0; k <= count; ++k) {
    const double x = std::min(1.0, k * step);
    const double g = gap(x);
    if (g > best) {
      best = g;
      best_x = x;
    }
  }

  // Golden-section refinement around the grid winner.
  double lo = std::max(0.0, best_x - step);
  double hi = std::min(1.0, best_x + step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = gap(x1), f2 = gap(x2);
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = gap(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = gap(x1);
    }
  }
  const double x = (lo + hi) / 2.0;
  return {gap(x), x};
}

}  // namespace spinheat
