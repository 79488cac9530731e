#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "hierops/models.hpp"
#include "hierops/stats.hpp"
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

bool exactly_symmetric(const DenseSymmetricMatrix& m) {
  return m.matrix() == m.matrix().transpose();
}

}  // namespace

TEST(LaplacianEntry, FrozenValuesMatchProjectorOracle) {
  const auto spec = lap(2);
  const Eigen::MatrixXd ref = oracle::laplacian(2, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(ref(0, 0), 0.3125);
  EXPECT_DOUBLE_EQ(ref(0, 1), 0.3125);
  EXPECT_DOUBLE_EQ(ref(0, 2), 0.0625);
  EXPECT_DOUBLE_EQ(laplacian_entry(spec, 0, 0), 0.3125);
  EXPECT_DOUBLE_EQ(laplacian_entry(spec, 0, 1), 0.3125);
  EXPECT_DOUBLE_EQ(laplacian_entry(spec, 0, 2), 0.0625);
  EXPECT_THROW(laplacian_entry(spec, 0, 4), ArgumentError);
}

TEST(BuildLaplacian, AgreesWithEntryFormulaAndOracle) {
  for (unsigned n = 0; n <= 6; ++n) {
    const auto spec = lap(n, 0.7, 1.3);
    const auto h = build_laplacian(spec);
    const Eigen::MatrixXd ref = oracle::laplacian(n, 0.7, 1.3);
    ASSERT_TRUE(exactly_symmetric(h));
    for (std::size_t j = 0; j < h.dimension(); ++j)
      for (std::size_t k = 0; k < h.dimension(); ++k) {
        EXPECT_EQ(h(j, k), laplacian_entry(spec, j, k));
        EXPECT_NEAR(h(j, k), ref(j, k), 1e-14);
      }
  }
}

TEST(BuildLaplacian, FrozenSpectra) {
  const Eigen::VectorXd e2 = oracle::eigenvalues(build_laplacian(lap(2)).matrix());
  const double want2[] = {0.0, 0.0, 0.5, 0.75};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(e2(i), want2[i], 1e-14);
  const Eigen::VectorXd e1 = oracle::eigenvalues(build_laplacian(lap(1)).matrix());
  EXPECT_NEAR(e1(0), 0.0, 1e-15);
  EXPECT_NEAR(e1(1), 0.5, 1e-15);
  const auto h0 = build_laplacian(lap(0));
  ASSERT_EQ(h0.dimension(), 1u);
  EXPECT_EQ(h0(0, 0), 0.0);
}

TEST(BuildLaplacian, ClosedFormSpectralLaw) {
  for (unsigned n = 1; n <= 10; ++n) {
    for (double c : {0.5, 1.0, 2.0}) {
      const auto spec = lap(n, 1.0, c);
      const Eigen::VectorXd w = eigvalsh(build_laplacian(spec));
      std::vector<double> expected;
      for (const auto& level : laplacian_spectrum(spec))
        expected.insert(expected.end(), level.multiplicity, level.energy);
      std::sort(expected.begin(), expected.end());
      ASSERT_EQ(expected.size(), static_cast<std::size_t>(w.size()));
      const double scale = expected.back();
      for (std::size_t i = 0; i < expected.size(); ++i)
        ASSERT_NEAR(w(static_cast<Eigen::Index>(i)), expected[i], 1e-9 * scale) << "n=" << n << " c=" << c;
    }
  }
}

TEST(BuildLaplacian, CapacityRefusal) {
  EXPECT_THROW(build_laplacian(lap(14)), CapacityError);
  EXPECT_THROW(build_laplacian(lap(5), BuildLimits{4}), CapacityError);
}

TEST(BuildAnderson, ZeroPotentialEqualsLaplacian) {
  Engine rng = make_stream(7, 0);
  const auto spec = lap(5);
  EXPECT_TRUE(build_anderson(spec, PotentialSpec{Gaussian{0.0}}, rng) == build_laplacian(spec));
}

TEST(BuildAnderson, SingleSiteIsPotential) {
  Engine a = make_stream(8, 0);
  Engine b = make_stream(8, 0);
  const auto h = build_anderson(lap(0), PotentialSpec{Gaussian{1.0}}, a);
  const double v = sample_potential(PotentialSpec{Gaussian{1.0}}, 1, b)[0];
  ASSERT_EQ(h.dimension(), 1u);
  EXPECT_EQ(h(0, 0), v);
}

TEST(BuildAnderson, DeterministicPerStream) {
  for (int rep = 0; rep < 3; ++rep) {
    Engine a = make_stream(99, 5);
    Engine b = make_stream(99, 5);
    EXPECT_TRUE(build_anderson(lap(6), PotentialSpec{Cauchy{0, 1}}, a) ==
                build_anderson(lap(6), PotentialSpec{Cauchy{0, 1}}, b));
  }
  Engine a = make_stream(99, 5);
  Engine b = make_stream(99, 6);
  EXPECT_FALSE(build_anderson(lap(4), PotentialSpec{Gaussian{1}}, a) ==
               build_anderson(lap(4), PotentialSpec{Gaussian{1}}, b));
}

TEST(UltrametricVariance, FrozenValues) {
  EXPECT_DOUBLE_EQ(ultrametric_entry_variance(2, 0.0, 2), 0.0625);
  EXPECT_DOUBLE_EQ(ultrametric_entry_variance(2, 0.0, 1), 0.3125);
  EXPECT_DOUBLE_EQ(ultrametric_entry_variance(2, 0.0, 0), 2.625);
  EXPECT_DOUBLE_EQ(ultrametric_entry_variance(0, 3.0, 0), 2.0);
  for (unsigned n : {1u, 4u, 9u})
    for (double c : {-1.5, 0.0, 0.7})
      EXPECT_DOUBLE_EQ(ultrametric_entry_variance(n, c, n), std::exp2(-(2.0 + c) * n));
  EXPECT_THROW(ultrametric_entry_variance(2, 0.0, 3), ArgumentError);
}

TEST(BuildUltrametric, SingleSiteVarianceTwo) {
  std::vector<double> v;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    Engine rng = make_stream(11, i);
    v.push_back(build_ultrametric(0, 0.5, rng)(0, 0));
  }
  EXPECT_NEAR(stats::variance(v), 2.0, 0.03);
}

TEST(BuildUltrametric, EntryClassVariancesSmallVolume) {
  // n = 2, c = 0: diagonal 2.625, d = 1: 0.3125, d = 2: 0.0625.
  const HierarchySpec h(2);
  std::vector<std::vector<double>> by_class(3);
  for (std::uint64_t i = 0; i < 100000; ++i) {
    Engine rng = make_stream(12, i);
    const auto m = build_ultrametric(2, 0.0, rng);
    ASSERT_TRUE(exactly_symmetric(m));
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t j = 0; j <= k; ++j) by_class[h.distance(j, k)].push_back(m(j, k));
  }
  for (unsigned d = 0; d <= 2; ++d) {
    std::vector<double> sq;
    for (double x : by_class[d]) sq.push_back(x * x);
    const double want = ultrametric_entry_variance(2, 0.0, d);
    EXPECT_NEAR(stats::mean(sq), want, 5.0 * stats::standard_error(sq)) << "d=" << d;
  }
}

TEST(BuildUltrametric, InfiniteCLeavesOnlyDiagonal) {
  Engine rng = make_stream(13, 0);
  const auto m = build_ultrametric(4, std::numeric_limits<double>::infinity(), rng);
  for (std::size_t j = 0; j < m.dimension(); ++j)
    for (std::size_t k = 0; k < m.dimension(); ++k)
      if (j != k) EXPECT_EQ(m(j, k), 0.0);
}

TEST(BuildRosenzweigPorter, LimitsAndVariance) {
  Engine rng = make_stream(14, 0);
  const auto diag = build_rosenzweig_porter(8, std::numeric_limits<double>::infinity(), PotentialSpec{Gaussian{1}}, rng);
  for (std::size_t j = 0; j < 8; ++j)
    for (std::size_t k = 0; k < 8; ++k)
      if (j != k) EXPECT_EQ(diag(j, k), 0.0);

  EXPECT_DOUBLE_EQ((RosenzweigPorterModel{4, 1.0, {}}.time()), 0.0625);
  std::vector<double> off, single;
  for (std::uint64_t i = 0; i < 40000; ++i) {
    Engine r = make_stream(15, i);
    const auto m = build_rosenzweig_porter(4, 1.0, PotentialSpec{Gaussian{0}}, r);
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t j = 0; j < k; ++j) off.push_back(m(j, k) * m(j, k));
    Engine s = make_stream(16, i);
    single.push_back(build_rosenzweig_porter(1, 0.0, PotentialSpec{Gaussian{0}}, s)(0, 0));
  }
  EXPECT_NEAR(stats::mean(off), 0.015625, 5.0 * stats::standard_error(off));
  // N = 1: V + g with Var g = 2t = 2.
  EXPECT_NEAR(stats::variance(single), 2.0, 0.05);
}

TEST(TraceNorm, Examples) {
  EXPECT_EQ(trace_norm(Eigen::MatrixXd::Zero(3, 3)), 0.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -2.0;
  EXPECT_NEAR(trace_norm(d), 3.0, 1e-14);
  Eigen::VectorXd phi = Eigen::VectorXd::Random(6).normalized();
  EXPECT_NEAR(trace_norm(-2.5 * phi * phi.transpose()), 2.5, 1e-12);
}

TEST(ScaleDiagnostics, FrozenAndAsymptotic) {
  const auto s0 = scale_diagnostics(0, 0.3);
  EXPECT_DOUBLE_EQ(s0.z, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(s0.m, 0.5);
  EXPECT_DOUBLE_EQ(scale_diagnostics(2, 0.0).z * scale_diagnostics(2, 0.0).z, 3.0625);
  // c < -1: Z 2^{(1+c) n / 2} stays bounded.
  for (double c : {-1.5, -2.0, -3.0}) {
    double lo = 1e300, hi = 0.0;
    for (unsigned n = 1; n <= 12; ++n) {
      const double r = scale_diagnostics(n, c).z * std::exp2((1.0 + c) * n / 2.0);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    EXPECT_LT(hi / lo, 2.0) << "c=" << c;
  }
}

TEST(Spine, SingleSiteAnderson) {
  Engine rng = make_stream(20, 0);
  const auto split = spine_operator(AndersonModel{lap(0), PotentialSpec{Gaussian{1}}}, 0, rng);
  EXPECT_TRUE(split.s == split.h);
  EXPECT_EQ(split.f(0, 0), 0.0);
}

TEST(Spine, LaplacianOuterBlockIsAveraging) {
  Engine rng = make_stream(21, 0);
  const auto split = spine_operator(LaplacianModel{lap(2)}, 0, rng);
  // X_2 = {2, 3}: F there is p_1 |phi><phi| on {2,3}, entries p_1 / 2 = 0.25.
  for (std::size_t j : {2u, 3u})
    for (std::size_t k : {2u, 3u}) EXPECT_DOUBLE_EQ(split.f(j, k), 0.25);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(split.f(0, j), 0.0);
    EXPECT_EQ(split.f(1, j), 0.0);
  }
}

TEST(Spine, DisconnectionAllFamilies) {
  const std::vector<ModelSpec> models = {
      LaplacianModel{lap(5)},
      AndersonModel{lap(5), PotentialSpec{Gaussian{1}}},
      UltrametricModel{5, 0.3},
      RosenzweigPorterModel{32, 0.5, PotentialSpec{Uniform{-1, 1}}},
  };
  for (const auto& model : models) {
    for (std::size_t x = 0; x < 32; x += 5) {
      Engine rng = make_stream(22, x);
      const auto split = spine_operator(model, x, rng);
      EXPECT_EQ(max_cross_spine_entry(split.f, split.spine_label), 0.0);
      EXPECT_LE(((split.h - split.s) - split.f).matrix().cwiseAbs().maxCoeff(), 1e-13);
      std::size_t bound = 0;
      for (const auto& t : split.center_terms) bound += numerical_rank(t.block);
      EXPECT_LE(numerical_rank(split.s.matrix()), bound);
      Engine again = make_stream(22, x);
      EXPECT_TRUE(build(model, again) == split.h);
    }
  }
}

TEST(Spine, LabelsMatchHierarchicalDistance) {
  const HierarchySpec h(5);
  const auto labels = spine_labels(UltrametricModel{5, 0.0}, 13);
  for (std::size_t y = 0; y < 32; ++y) EXPECT_EQ(labels[y], h.distance(13, y));
}

TEST(UltrametricTraceNorm, JensenBoundSmallScale) {
  // c = 2: E ||H(B_r(x))||_1 <= |B_r|^{(1-c)/2} within 3 standard errors.
  const double c = 2.0;
  const unsigned n = 6;
  std::vector<std::vector<double>> norms(n + 1);
  for (std::uint64_t i = 0; i < 400; ++i) {
    Engine rng = make_stream(30, i);
    const auto split = spine_operator(UltrametricModel{n, c}, 0, rng);
    for (const auto& t : split.center_terms) norms[t.level].push_back(trace_norm(t.block));
  }
  for (unsigned r = 1; r <= n; ++r) {
    const double bound = std::exp2(r * (1.0 - c) / 2.0);
    EXPECT_LE(stats::mean(norms[r]), bound + 3.0 * stats::standard_error(norms[r])) << "r=" << r;
  }
}
