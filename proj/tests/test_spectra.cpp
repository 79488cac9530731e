#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hierops/spectra.hpp"
#include "oracles.hpp"

using namespace hierops;

namespace {

LaplacianSpec lap(unsigned n, double eps = 1.0, double c = 1.0) {
  LaplacianSpec s;
  s.hierarchy = HierarchySpec(n);
  s.eps = eps;
  s.c = c;
  return s;
}

Eigen::MatrixXd goe(std::size_t n, Engine& rng) {
  Eigen::MatrixXd m(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < k; ++j) m(j, k) = m(k, j) = standard_normal(rng);
    m(k, k) = std::numbers::sqrt2 * standard_normal(rng);
  }
  return m;
}

}  // namespace

TEST(RescalePoints, FrozenExample) {
  const std::vector<double> eigs{0.5, 0.51, 0.7};
  const auto s = rescale_points(eigs, 0.5, 4, 1.0);
  ASSERT_EQ(s.points.size(), 2u);
  EXPECT_DOUBLE_EQ(s.points[0], 0.0);
  EXPECT_NEAR(s.points[1], 0.16, 1e-12);
  EXPECT_THROW(rescale_points(eigs, 0.5, 4, -1.0), ArgumentError);
}

TEST(GapRatios, FrozenExamples) {
  const std::vector<double> e{0.0, 1.0, 3.0, 4.0};
  const auto r = gap_ratios(e, {0.0, 1.0});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r[0], 0.5);
  EXPECT_DOUBLE_EQ(r[1], 0.5);
  const std::vector<double> flat{1.0, 1.0, 1.0};
  EXPECT_EQ(gap_ratios(flat, {0.0, 1.0}), std::vector<double>{1.0});
  const std::vector<double> unsorted{0.0, 2.0, 1.0};
  EXPECT_THROW(gap_ratios(unsorted, {0.0, 1.0}), ArgumentError);
  EXPECT_THROW(gap_ratios(e), StatisticsError);
  EXPECT_THROW(gap_ratios(e, {0.7, 0.2}), ArgumentError);
}

TEST(GapRatios, PoissonReference) {
  Engine rng = make_stream(40, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> means;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> pts(4000);
    for (double& x : pts) x = u(rng);
    std::sort(pts.begin(), pts.end());
    means.push_back(gap_ratio_mean(pts));
  }
  EXPECT_NEAR(stats::mean(means), kPoissonGapRatio, 4.0 * stats::standard_error(means) + 1e-3);
  EXPECT_NEAR(kPoissonGapRatio, 2.0 * std::numbers::ln2 - 1.0, 1e-16);
}

TEST(GapRatios, GoeReference) {
  std::vector<double> means;
  for (std::uint64_t rep = 0; rep < 30; ++rep) {
    Engine rng = make_stream(41, rep);
    means.push_back(gap_ratio_mean(eigvalsh(goe(400, rng))));
  }
  EXPECT_NEAR(stats::mean(means), kGoeGapRatio, 4.0 * stats::standard_error(means) + 2e-3);
}

TEST(EmpiricalDos, LaplacianAgainstKernelOracle) {
  const auto spec = lap(6);
  const auto sd = eigh(build_laplacian(spec), false);
  const std::vector<SpectralData> one{sd};
  const double bw = 0.02;
  const auto g = empirical_dos(one, std::nullopt, bw);
  EXPECT_NEAR(g.integral(), 1.0, 1e-6);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); i += 7) {
    double want = 0.0;
    for (const auto& level : laplacian_spectrum(spec)) {
      const double z = (g.nodes[i] - level.energy) / bw;
      want += static_cast<double>(level.multiplicity) / 64.0 * std::exp(-0.5 * z * z) /
              (bw * std::sqrt(2.0 * std::numbers::pi));
    }
    worst = std::max(worst, std::abs(g.values[i] - want));
  }
  EXPECT_LE(worst, 0.01);
}

TEST(EmpiricalDos, SiteResolvedEqualsAverageForLaplacian) {
  const auto sd = eigh(build_laplacian(lap(5)));
  const std::vector<SpectralData> one{sd};
  const auto avg = empirical_dos(one, std::nullopt, 0.05);
  for (std::size_t site : {0u, 17u, 31u}) {
    const auto g = empirical_dos(one, site, 0.05);
    ASSERT_EQ(g.size(), avg.size());
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g.values[i], avg.values[i], 1e-9);
  }
  EXPECT_THROW(empirical_dos(one, 32u, 0.05), ArgumentError);
  EXPECT_THROW(empirical_dos(one, std::nullopt, 0.0), ConfigError);
}

TEST(EmpiricalDos, GoeSemicircle) {
  std::vector<SpectralData> reals;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    Engine rng = make_stream(42, rep);
    SpectralData sd;
    sd.eigenvalues = eigvalsh(goe(400, rng)) / std::sqrt(400.0);
    reals.push_back(sd);
  }
  const auto g = empirical_dos(reals, std::nullopt, 0.08);
  for (double e : {-1.0, 0.0, 0.5, 1.2}) EXPECT_NEAR(g(e), semicircle_density(e), 0.02) << e;
}

TEST(BandEdgeMass, FrozenAndFiniteVolume) {
  const auto spec = lap(0);
  EXPECT_DOUBLE_EQ(band_edge_mass(spec, 0.3), 0.25);
  EXPECT_DOUBLE_EQ(band_edge_mass(spec, 0.6), 0.5);
  EXPECT_DOUBLE_EQ(band_edge_mass(spec, 1.0), 1.0);

  // Explicit couplings: equals the finite-volume spectral measure at site 0.
  LaplacianSpec fin = lap(6);
  fin.couplings = {0.5, 0.3, 0.2, 0.1, 0.07, 0.02};
  const auto sd = eigh(build_laplacian(fin));
  const double top = fin.total_coupling();
  for (double l : {0.011, 0.05, 0.13, 0.25, 0.6, 1.0}) {
    double want = 0.0;
    for (std::size_t i = 0; i < sd.dimension(); ++i)
      if (sd.eigenvalues(static_cast<Eigen::Index>(i)) >= top - l - 1e-12)
        want += std::pow(sd.eigenvectors(0, static_cast<Eigen::Index>(i)), 2);
    EXPECT_NEAR(band_edge_mass(fin, l), want, 1e-10) << l;
  }
}

TEST(SpectralDimension, TwoOverC) {
  for (double c : {0.5, 1.0, 2.0}) {
    const auto spec = lap(0, 1.0, c);
    const auto grid = default_dimension_grid(spec);
    const auto fit = spectral_dimension(spec, grid);
    EXPECT_NEAR(fit.estimate, 2.0 / c, 0.05 * 2.0 / c) << "c=" << c;
  }
}

TEST(SpectralDimension, GridValidation) {
  const auto spec = lap(0);
  const std::vector<double> bad_order{0.01, 0.1};
  const std::vector<double> out_of_range{2.0, 0.1};
  const std::vector<double> single{0.1};
  EXPECT_THROW(spectral_dimension(spec, bad_order), ConfigError);
  EXPECT_THROW(spectral_dimension(spec, out_of_range), ConfigError);
  EXPECT_THROW(spectral_dimension(spec, single), ConfigError);
}
