#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/distributions/gamma.hpp>

#include "histolim/random_stream.hpp"
#include "oracles.hpp"

using histolim::RandomStream;

TEST(RandomStream, ReplaysAndSeparatesStreams) {
  RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int k = 0; k < 100; ++k) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_NE(x, c.uniform());
    EXPECT_NE(x, d.uniform());
  }
}

TEST(RandomStream, UniformIsOpenInterval) {
  RandomStream s(1, 0);
  for (int k = 0; k < 100000; ++k) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RandomStream, NormalPassesKs) {
  RandomStream s(2, 0);
  std::vector<double> x(20000);
  for (auto& v : x) v = s.normal();
  const double d = oracle::ks_statistic(x, oracle::normal_cdf);
  EXPECT_GT(oracle::ks_pvalue(d, x.size()), 0.01);
}

class GammaShapes : public ::testing::TestWithParam<double> {};

TEST_P(GammaShapes, PassesKs) {
  const double shape = GetParam();
  RandomStream s(3, static_cast<std::uint64_t>(shape * 1000));
  std::vector<double> x(20000);
  for (auto& v : x) v = s.gamma(shape);
  const boost::math::gamma_distribution<double> g(shape, 1.0);
  const double d = oracle::ks_statistic(x, [&](double t) { return t <= 0 ? 0.0 : boost::math::cdf(g, t); });
  EXPECT_GT(oracle::ks_pvalue(d, x.size()), 0.01) << "shape " << shape;
}

INSTANTIATE_TEST_SUITE_P(Shapes, GammaShapes, ::testing::Values(0.05, 0.3, 1.0, 2.5, 17.0));

TEST(RandomStream, LogGammaTinyShapeMoments) {
  // For shape a -> 0, a log G is asymptotically -Exp(1) distributed.
  const double a = std::ldexp(1.0, -20);
  RandomStream s(4, 0);
  std::vector<double> x(20000);
  for (auto& v : x) {
    v = -a * s.log_gamma(a);
    ASSERT_TRUE(std::isfinite(v));
  }
  const double d = oracle::ks_statistic(x, [](double t) { return t <= 0 ? 0.0 : 1.0 - std::exp(-t); });
  EXPECT_GT(oracle::ks_pvalue(d, x.size()), 0.01);
  EXPECT_EQ(s.gamma(0.0), 0.0);
  EXPECT_EQ(s.log_gamma(0.0), -INFINITY);
}

TEST(RandomStream, BetaPassesKsAndExtendedConventions) {
  RandomStream s(5, 0);
  std::vector<double> x(20000);
  for (auto& v : x) v = s.beta(2.0, 0.5);
  const double d = oracle::ks_statistic(x, [](double t) { return oracle::beta_cdf(2.0, 0.5, t); });
  EXPECT_GT(oracle::ks_pvalue(d, x.size()), 0.01);
  EXPECT_EQ(s.beta(INFINITY, 1.0), 1.0);
  EXPECT_EQ(s.beta(1.0, INFINITY), 0.0);
  EXPECT_EQ(s.beta(INFINITY, INFINITY), 0.5);
}

TEST(Oracle, KsPvalueSanity) {
  EXPECT_NEAR(oracle::ks_pvalue(0.0, 100), 1.0, 1e-12);
  // Critical value 1.628 / sqrt(n) at level 0.01 for large n.
  EXPECT_NEAR(oracle::ks_pvalue(1.6276 / std::sqrt(1e6), 1000000), 0.01, 1e-3);
}
