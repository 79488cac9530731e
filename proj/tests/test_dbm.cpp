#include <gtest/gtest.h>

#include <numeric>

#include "hierops/dbm.hpp"
#include "hierops/models.hpp"
#include "hierops/spectra.hpp"
#include "hierops/stats.hpp"

using namespace hierops;

TEST(EvolveExact, ZeroDurationIsIdentity) {
  Engine rng = make_stream(70, 0);
  const DBMState s{{-1.0, 0.5, 2.0}, 0.25};
  const auto out = evolve_exact(s, 0.0, rng);
  EXPECT_EQ(out.particles, s.particles);
  EXPECT_EQ(out.elapsed, 0.25);
  EXPECT_THROW(evolve_exact(s, -1.0, rng), ArgumentError);
}

TEST(EvolveExact, SingleParticleAndTraceVariance) {
  std::vector<double> single, trace;
  for (std::uint64_t i = 0; i < 40000; ++i) {
    Engine rng = make_stream(71, i);
    single.push_back(evolve_exact(DBMState{{0.0}, 0.0}, 0.3, rng).particles[0]);
    const auto s = evolve_exact(DBMState{{-1.0, 0.0, 1.0, 2.0}, 0.0}, 0.3, rng);
    trace.push_back(std::accumulate(s.particles.begin(), s.particles.end(), 0.0));
  }
  EXPECT_NEAR(stats::variance(single), 0.6, 0.02);
  EXPECT_NEAR(stats::mean(trace), 2.0, 0.02);
  EXPECT_NEAR(stats::variance(trace), 0.6, 0.02);
}

TEST(EvolveSde, NoiselessTwoParticleGap) {
  // gap' = 1 / gap for N = 2, so gap^2 = 1 + 2 t.
  Engine rng = make_stream(72, 0);
  const auto out = evolve_sde(DBMState{{-0.5, 0.5}, 0.0}, 1.5, rng, SdeOptions{1e-4, false});
  EXPECT_NEAR(out.particles[1] - out.particles[0], 2.0, 1e-3);
  EXPECT_NEAR(out.particles[1] + out.particles[0], 0.0, 1e-12);
  EXPECT_NEAR(out.elapsed, 1.5, 1e-15);
  EXPECT_THROW(evolve_sde(DBMState{{1.0, 1.0}, 0.0}, 1.0, rng), ArgumentError);
}

TEST(EvolveSde, MatchesExactInLaw) {
  const DBMState start{{-1.0, -0.2, 0.4, 1.0}, 0.0};
  std::vector<double> a, b;
  for (std::uint64_t i = 0; i < 3000; ++i) {
    Engine r1 = make_stream(73, i);
    Engine r2 = make_stream(74, i);
    const auto e = evolve_exact(start, 0.05, r1);
    const auto s = evolve_sde(start, 0.05, r2, SdeOptions{2e-4});
    a.insert(a.end(), e.particles.begin(), e.particles.end());
    b.insert(b.end(), s.particles.begin(), s.particles.end());
  }
  EXPECT_LT(stats::ks_two_sample(a, b), 0.03);
}

TEST(RecursiveSpectrum, TraceAndSeed) {
  Engine rng = make_stream(75, 0);
  const auto r = recursive_spectrum(3, 1.0, rng);
  ASSERT_EQ(r.eigenvalues.size(), 8u);
  EXPECT_TRUE(std::is_sorted(r.eigenvalues.begin(), r.eigenvalues.end()));
  EXPECT_EQ(r.trace.sizes, (std::vector<std::size_t>{1, 2, 4, 8}));
  EXPECT_DOUBLE_EQ(r.trace.durations[3], 0.015625);
  EXPECT_DOUBLE_EQ(r.trace.durations[0], 1.0);

  std::vector<double> m, s;
  for (std::uint64_t i = 0; i < 40000; ++i) {
    Engine r1 = make_stream(76, i);
    m.push_back(recursive_spectrum(0, 1.0, r1).eigenvalues[0]);
    Engine r2 = make_stream(77, i);
    s.push_back(recursive_spectrum(0, 1.0, r2, RecursionSeed::kStandardNormal).eigenvalues[0]);
  }
  EXPECT_NEAR(stats::variance(m), 2.0, 0.05);
  EXPECT_NEAR(stats::variance(s), 1.0, 0.03);
}

TEST(RecursiveSpectrum, AgreesWithMatrixModelSmall) {
  std::vector<double> rec, dir, gr_rec, gr_dir;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    Engine r1 = make_stream(78, i);
    const auto e1 = recursive_spectrum(4, 1.0, r1).eigenvalues;
    Engine r2 = make_stream(79, i);
    const Eigen::VectorXd e2 = eigvalsh(build_ultrametric(4, 1.0, r2));
    rec.insert(rec.end(), e1.begin(), e1.end());
    dir.insert(dir.end(), e2.data(), e2.data() + e2.size());
    gr_rec.push_back(gap_ratio_mean(e1, {0.25, 0.75}));
    gr_dir.push_back(gap_ratio_mean(e2, {0.25, 0.75}));
  }
  EXPECT_LT(stats::ks_two_sample(rec, dir), 0.05);
  EXPECT_NEAR(stats::mean(gr_rec), stats::mean(gr_dir), 0.03);
}

TEST(RecursiveSpectrum, Deterministic) {
  Engine a = make_stream(80, 3);
  Engine b = make_stream(80, 3);
  EXPECT_EQ(recursive_spectrum(5, 0.5, a).eigenvalues, recursive_spectrum(5, 0.5, b).eigenvalues);
}
