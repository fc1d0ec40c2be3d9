#include "spinheat/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "spinheat/rng.hpp"

namespace {

using namespace spinheat;

std::shared_ptr<const Lattice> ring(int n) {
  return build_lattice({LatticeKind::chain, {n}, Boundary::periodic});
}

std::shared_ptr<const Lattice> open_chain(int n) {
  return build_lattice({LatticeKind::chain, {n}, Boundary::open});
}

TEST(GapSweep, ZeroAtZeroTimeExactly) {
  const auto lat = ring(6);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0, 3, 4});
  const auto report = gap_sweep(cache, s0, {0.0, 0.5, 1.0});
  EXPECT_EQ(report.gap_rho[0], 0.0);
  EXPECT_EQ(report.gap_phi[0], 0.0);
  EXPECT_EQ(report.gap_phi_half[0], 0.0);
}

TEST(GapSweep, TwoChainRhoGapVanishes) {
  const auto lat = open_chain(2);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0});
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(0.5 * k);
  const auto report = gap_sweep(cache, s0, grid);
  EXPECT_LE(report.max_gap_rho, 1e-12);
}

TEST(GapSweep, ValidatesGrid) {
  const auto lat = ring(4);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0});
  EXPECT_THROW(gap_sweep(cache, s0, {}), config_error);
  EXPECT_THROW(gap_sweep(cache, s0, {-0.5, 1.0}), config_error);
  EXPECT_THROW(gap_sweep(cache, s0, {1.0, 0.5}), config_error);
}

TEST(GapSweep, LateWindowMaximumIsRestricted) {
  const auto lat = ring(6);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0, 1, 2});
  const auto report = gap_sweep(cache, s0, {0.5, 2.0, 4.0, 6.0});
  double late = 0.0;
  for (std::size_t k = 0; k < report.mu_grid.size(); ++k)
    if (report.mu_grid[k] >= 4.0)
      late = std::max(late, report.gap_phi_half[k]);
  EXPECT_DOUBLE_EQ(report.max_gap_phi_half_late, late);
  EXPECT_LE(report.max_gap_phi_half_late, report.max_gap_phi_half);
}

TEST(GapSweep, ReportsAreFlipInvariant) {
  const auto lat = ring(8);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0, 1, 4});
  const std::vector<double> grid{0.0, 0.25, 1.0, 3.0, 7.0};
  const auto report = gap_sweep(cache, s0, grid);
  const auto flipped = gap_sweep(cache, s0.complement(), grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_NEAR(report.gap_rho[k], flipped.gap_rho[k], 1e-12);
    EXPECT_NEAR(report.gap_phi[k], flipped.gap_phi[k], 1e-12);
    EXPECT_NEAR(report.gap_phi_half[k], flipped.gap_phi_half[k], 1e-12);
  }
}

TEST(GapSweep, DeterministicAcrossThreadCounts) {
  const auto lat = ring(7);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0, 2, 5});
  const std::vector<double> grid{0.1, 0.7, 2.0, 5.5};
  const auto serial = gap_sweep(cache, s0, grid, 1);
  const auto parallel = gap_sweep(cache, s0, grid, 4);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_EQ(serial.gap_rho[k], parallel.gap_rho[k]);
    EXPECT_EQ(serial.p_exact[k], parallel.p_exact[k]);
  }
}

TEST(SmallMuRate, TwoChainIsIdenticallyZero) {
  const auto lat = open_chain(2);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0});
  const auto fit = small_mu_rate(cache, s0, 1e-3, 1e-1, 6);
  EXPECT_TRUE(fit.identically_zero);
  EXPECT_FALSE(fit.fit_valid);
  EXPECT_EQ(fit.included_count, 0);
  for (bool e : fit.excluded) EXPECT_TRUE(e);
}

TEST(SmallMuRate, GridIsDecreasingAndFitIsQuadraticish) {
  const auto lat = ring(8);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0, 1, 2, 5});
  const auto fit = small_mu_rate(cache, s0, 1e-3, 1e-1, 8);
  ASSERT_EQ(fit.mu.size(), 8u);
  for (std::size_t k = 1; k < fit.mu.size(); ++k)
    EXPECT_LT(fit.mu[k], fit.mu[k - 1]);
  EXPECT_DOUBLE_EQ(fit.mu.front(), 1e-1);
  EXPECT_DOUBLE_EQ(fit.mu.back(), 1e-3);
  ASSERT_TRUE(fit.fit_valid);
  // the rho gap vanishes faster than linearly in one dimension
  EXPECT_GE(fit.slope, 1.5);
  // gap/mu ratios fall toward zero on the small-mu tail
  for (std::size_t k = fit.mu.size() - 3; k < fit.mu.size(); ++k)
    EXPECT_LT(fit.ratio[k], fit.ratio[k - 1]);
}

TEST(SmallMuRate, ValidatesArguments) {
  const auto lat = ring(4);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0});
  EXPECT_THROW(small_mu_rate(cache, s0, 0.0, 1.0, 8), config_error);
  EXPECT_THROW(small_mu_rate(cache, s0, 0.5, 0.1, 8), config_error);
  EXPECT_THROW(small_mu_rate(cache, s0, 1e-3, 1e-1, 3), config_error);
}

TEST(LocalityProbe, EmptyExteriorHasZeroInfluence) {
  const auto lat = ring(6);  // eccentricity 3
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0, 1, 2});
  const auto report = locality_probe(cache, s0, 0, 1.0, {3, 4}, 8, 7);
  for (const auto& row : report.rows) {
    EXPECT_EQ(row.exterior_size, 0);
    EXPECT_EQ(row.influence, 0.0);
    EXPECT_EQ(row.evaluations, 0u);
  }
}

TEST(LocalityProbe, ZeroTimeIsPerfectlyLocal) {
  const auto lat = ring(8);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0, 1, 2, 3});
  const auto report = locality_probe(cache, s0, 0, 0.0, {1, 2, 3}, 16, 3);
  for (const auto& row : report.rows) EXPECT_LE(row.influence, 1e-15);
}

TEST(LocalityProbe, InfluenceIsMonotoneAndDecaysWithRadius) {
  const auto lat = ring(10);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0, 1, 2, 3, 4});
  const auto report =
      locality_probe(cache, s0, 0, 1.0, {1, 2, 3, 4}, 32, 11);
  ASSERT_EQ(report.rows.size(), 4u);
  for (std::size_t k = 1; k < report.rows.size(); ++k)
    EXPECT_LE(report.rows[k].influence, report.rows[k - 1].influence);
  EXPECT_GT(report.rows.front().influence, 0.0);
}

TEST(LocalityProbe, DeterministicGivenSeed) {
  const auto lat = ring(9);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0, 4, 7});
  const auto a = locality_probe(cache, s0, 2, 0.7, {1, 2}, 8, 42);
  const auto b = locality_probe(cache, s0, 2, 0.7, {1, 2}, 8, 42);
  for (std::size_t k = 0; k < a.rows.size(); ++k)
    EXPECT_EQ(a.rows[k].influence, b.rows[k].influence);
}

TEST(LocalityProbe, SmallExteriorsAreEnumeratedExhaustively) {
  const auto lat = ring(8);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0, 1});
  const auto report = locality_probe(cache, s0, 0, 1.0, {2, 3}, 64, 5);
  for (const auto& row : report.rows) {
    EXPECT_TRUE(row.exhaustive);
    EXPECT_EQ(row.evaluations,
              std::uint64_t{1} << row.exterior_size);
  }
}

TEST(LocalityProbe, ValidatesArguments) {
  const auto lat = ring(6);
  const SectorCache cache(lat);
  const SpinConfig s0(lat, {0});
  EXPECT_THROW(locality_probe(cache, s0, 0, 1.0, {}, 8, 1), config_error);
  EXPECT_THROW(locality_probe(cache, s0, 0, 1.0, {1}, 0, 1), config_error);
  EXPECT_THROW(locality_probe(cache, s0, 9, 1.0, {1}, 8, 1), config_error);
  EXPECT_THROW(locality_probe(cache, s0, 0, 1.0, {-1}, 8, 1), config_error);
}

TEST(ProductState, NormsAndSharpLimits) {
  const auto lat = open_chain(4);
  const auto all_up = average_field_state(lat, SiteField(4, 1.0));
  EXPECT_DOUBLE_EQ(all_up.squared_norm(), 1.0);
  const auto full = fullspace::product_vector(all_up.up(), all_up.down());
  for (std::size_t b = 0; b < full.size(); ++b)
    EXPECT_DOUBLE_EQ(full[b], b == 0b1111 ? 1.0 : 0.0);

  const auto half = average_field_state(lat, SiteField(4, 0.5));
  EXPECT_DOUBLE_EQ(half.squared_norm(), std::pow(2.0, -4));

  const SpinConfig s0(lat, {0});
  const auto sharp = average_field_state(lat, s0.indicator());
  EXPECT_EQ(product_expectation(sharp), s0.indicator());
}

TEST(ProductState, ExpectationEqualsRhoTransform) {
  const auto lat = ring(12);
  SplitMix64 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    SiteField phi(12);
    for (double& v : phi) v = rng.uniform01();
    const SiteField via_product =
        product_expectation(average_field_state(lat, phi));
    const SiteField via_rho = rho_transform(phi);
    EXPECT_LE(field_gap(via_product, via_rho), 1e-15);
  }
}

TEST(ProductState, ExpectationMatchesFullSpaceOracle) {
  // <psi, p_i psi> / <psi, psi> computed literally in the 2^n space
  const auto lat = ring(5);
  SplitMix64 rng(8);
  SiteField phi(5);
  for (double& v : phi) v = rng.uniform01();
  const auto ps = average_field_state(lat, phi);
  const auto psi = fullspace::product_vector(ps.up(), ps.down());
  double denom = 0.0;
  SiteField numer(5, 0.0);
  for (std::size_t b = 0; b < psi.size(); ++b) {
    const double w = psi[b] * psi[b];
    denom += w;
    for (int i = 0; i < 5; ++i)
      if ((b >> i) & 1) numer[i] += w;
  }
  const SiteField expected = [&] {
    SiteField out(5);
    for (int i = 0; i < 5; ++i) out[i] = numer[i] / denom;
    return out;
  }();
  EXPECT_LE(field_gap(product_expectation(ps), expected), 1e-14);
}

TEST(AverageFieldResidual, ConstantFieldIsStationary) {
  const auto lat = ring(6);
  EXPECT_EQ(average_field_residual(*lat, SiteField(6, 0.37)), 0.0);
}

TEST(AverageFieldResidual, NearUniformBeatsSharp) {
  const auto lat = ring(6);
  const HeatPropagator heat(lat);
  const SpinConfig s0(lat, {0, 1, 2});
  const double late =
      average_field_residual(*lat, heat_solve(heat, s0, 10.0));
  const double early =
      average_field_residual(*lat, heat_solve(heat, s0, 0.1));
  EXPECT_LT(late, early);
}

TEST(AverageFieldResidual, FlipInvariant) {
  const auto lat = ring(5);
  const HeatPropagator heat(lat);
  const SpinConfig s0(lat, {0, 3});
  for (double mu : {0.2, 1.0}) {
    const SiteField phi = heat_solve(heat, s0, mu);
    const double a = average_field_residual(*lat, phi);
    const double b = average_field_residual(*lat, flip_field(phi));
    EXPECT_NEAR(a, b, 1e-12);
  }
}

TEST(AverageFieldResidual, RejectsLargeLattices) {
  const auto lat =
      build_lattice({LatticeKind::chain, {21}, Boundary::open});
  EXPECT_THROW(average_field_residual(*lat, SiteField(21, 0.5)),
               config_error);
}

TEST(BoundScan, MatchesClosedFormStationarity) {
  // stationary point: 2x(1-x) = (3 - sqrt 5)/2, i.e. w^2 + w = 1 for
  // w = 2x^2 - 2x + 1
  const double w = (std::sqrt(5.0) - 1.0) / 2.0;
  const double x_star = (1.0 - std::sqrt(std::sqrt(5.0) - 2.0)) / 2.0;
  const double gap_star = x_star * (1.0 - 2.0 * x_star) * (1.0 - x_star) / w;

  const auto result = bound_scan(1e-3);
  EXPECT_NEAR(result.max_gap, gap_star, 1e-10);
  EXPECT_NEAR(result.argmax, x_star, 1e-7);
  EXPECT_LT(result.max_gap, 0.16);

  // windows for the frozen reference values
  EXPECT_GT(result.max_gap, 0.1500);
  EXPECT_LT(result.max_gap, 0.1503);
  EXPECT_GT(result.argmax, 0.2565);
  EXPECT_LT(result.argmax, 0.2576);
}

TEST(BoundScan, EndpointsAndValidation) {
  EXPECT_DOUBLE_EQ(std::abs(0.0 - rho_scalar(0.0)), 0.0);
  EXPECT_DOUBLE_EQ(std::abs(1.0 - rho_scalar(1.0)), 0.0);
  EXPECT_THROW(bound_scan(0.0), config_error);
  EXPECT_THROW(bound_scan(-1e-4), config_error);
  EXPECT_THROW(bound_scan(2e-3), config_error);
}

}  // namespace
