#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hierops/rgflow.hpp"

using namespace hierops;

namespace {

double cauchy_pdf(double x, double m, double g) {
  const double z = (x - m) / g;
  return 1.0 / (std::numbers::pi * g * (1.0 + z * z));
}

double max_error_vs(const DensityGrid& d, double m, double g) {
  double worst = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    worst = std::max(worst, std::abs(d.values[i] - cauchy_pdf(d.nodes[i], m, g)));
  return worst;
}

}  // namespace

TEST(SinhNodes, Shape) {
  const auto x = sinh_nodes(0.0, 0.02, 1e6, 4096);
  ASSERT_EQ(x.size(), 4096u);
  EXPECT_NEAR(x.front(), -1e6, 1e-3);
  EXPECT_NEAR(x.back(), 1e6, 1e-3);
  for (std::size_t i = 1; i < x.size(); ++i) ASSERT_GT(x[i], x[i - 1]);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x[i], -x[x.size() - 1 - i], 1e-9 * (1 + std::abs(x[i])));
  EXPECT_THROW(sinh_nodes(0.0, 0.0, 1.0, 10), ConfigError);
}

TEST(Discretize, MassAndTail) {
  const auto g = discretize(PotentialSpec{Gaussian{1.0}});
  EXPECT_NEAR(g.total_mass(), 1.0, 1e-12);
  EXPECT_EQ(g.tail_mass, 0.0);
  EXPECT_NEAR(g.sup(), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-4);
  const auto c = discretize(PotentialSpec{Cauchy{0.0, 1.0}});
  EXPECT_NEAR(c.tail_mass, 2.0 / (std::numbers::pi * 1e6), 1e-9);
  EXPECT_NEAR(c.total_mass(), 1.0, 1e-12);
}

TEST(Density, ShiftAndRoundTrip) {
  const auto g = discretize(PotentialSpec{Cauchy{0.0, 1.0}}, TransportOptions{0.02, 100.0, 64});
  const auto s = shifted(g, 0.25);
  EXPECT_DOUBLE_EQ(s(-0.25), g(0.0));
  std::stringstream ss;
  write_density(ss, g);
  const auto back = read_density(ss);
  EXPECT_EQ(back.nodes, g.nodes);
  EXPECT_EQ(back.values, g.values);
  EXPECT_EQ(back.tail_mass, g.tail_mass);
  std::stringstream bad("# nope 1\n0 1\n");
  EXPECT_THROW(read_density(bad), ConfigError);
}

TEST(ApplyT, CauchyFixedShape) {
  for (const auto& [m, g] : {std::pair{0.0, 1.0}, std::pair{0.3, 1.0}, std::pair{0.0, 0.5}}) {
    TransportDiagnostics diag;
    const auto out = apply_T(discretize(PotentialSpec{Cauchy{m, g}}), 0.5, {}, &diag);
    EXPECT_LE(max_error_vs(out, m + 0.5, g), 1e-3) << m << " " << g;
    EXPECT_NEAR(out.total_mass(), 1.0, 1e-9);
    EXPECT_FALSE(diag.singularity_warning);
    EXPECT_LT(std::abs(diag.mass_defect), 1e-3);
  }
}

TEST(ApplyT, GaussianMassAndSymmetry) {
  const auto out = apply_T(discretize(PotentialSpec{Gaussian{1.0}}), 0.0);
  EXPECT_NEAR(out.total_mass(), 1.0, 1e-9);
  for (double x : {0.1, 0.7, 2.0, 10.0}) EXPECT_NEAR(out(x), out(-x), 1e-6 * (1 + out(x)));
}

TEST(ApplyT, ConcentratedInputWarns) {
  TransportDiagnostics diag;
  const auto in = discretize(PotentialSpec{Uniform{-1e-4, 1e-4}}, TransportOptions{1e-6, 1e6, 4096});
  apply_T(in, 0.0, {}, &diag);
  EXPECT_TRUE(diag.singularity_warning);
}

TEST(SampleT, CauchyMedianShifts) {
  Engine rng = make_stream(60, 0);
  auto w = sample_T(PotentialSpec{Cauchy{0.0, 1.0}}, 0.5, 200000, rng);
  EXPECT_NEAR(stats::median(w), 0.5, 0.01);
  const std::vector<double> q{stats::quantile(w, 0.25), stats::quantile(w, 0.75)};
  EXPECT_NEAR(q[0], -0.5, 0.02);
  EXPECT_NEAR(q[1], 1.5, 0.02);
}

TEST(McApplyT, Validation) {
  Engine rng = make_stream(61, 0);
  EXPECT_THROW(mc_apply_T(PotentialSpec{Gaussian{1}}, 0.5, 100, 0.05, rng), ConfigError);
  EXPECT_THROW(mc_apply_T(PotentialSpec{Gaussian{1}}, 0.5, 20000, 0.0, rng), ConfigError);
  EXPECT_THROW(mc_apply_T(PotentialSpec{Gaussian{1}}, 0.5, 20000, 0.1, rng, 64, std::pair{1.0, 0.0}), ConfigError);
  const auto kde = mc_apply_T(PotentialSpec{Gaussian{1}}, 0.5, 20000, 0.1, rng, 64, std::pair{-2.0, 3.0});
  EXPECT_DOUBLE_EQ(kde.density.nodes.front(), -2.0);
  EXPECT_DOUBLE_EQ(kde.density.nodes.back(), 3.0);
}

TEST(CompareTransport, GaussianAgreesWithinErrors) {
  Engine rng = make_stream(62, 0);
  const auto cmp = compare_transport(PotentialSpec{Gaussian{1.0}}, 0.5, 200000, 0.05, rng);
  EXPECT_GT(cmp.nodes_checked, 500u);
  EXPECT_LT(cmp.max_z, 4.0);
}

TEST(Flow, CauchySupNormConstant) {
  FlowOptions opt;
  opt.steps = 4;
  const auto rep = flow(discretize(PotentialSpec{Cauchy{0.0, 1.0}}), opt);
  ASSERT_EQ(rep.sup_norms.size(), 4u);
  EXPECT_FALSE(rep.aborted);
  for (double s : rep.sup_norms) EXPECT_NEAR(s, 1.0 / std::numbers::pi, 1e-3);
  EXPECT_NEAR(rep.shifts[0], 0.5, 1e-15);
  EXPECT_NEAR(rep.shifts[3], 0.0625, 1e-15);
  EXPECT_NEAR(rep.growth_exponent, 0.0, 1e-3);
  EXPECT_THROW(flow(discretize(PotentialSpec{Cauchy{0.0, 1.0}}), FlowOptions{1.0, 1.0, 0}), ConfigError);
}
