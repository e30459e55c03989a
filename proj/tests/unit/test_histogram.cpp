#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "histolim/density.hpp"
#include "histolim/error.hpp"
#include "histolim/histogram.hpp"
#include "histolim/measure.hpp"
#include "oracles.hpp"

using namespace histolim;

namespace {

Histogram random_probability(const PartitionPtr& p, std::mt19937& gen) {
  std::exponential_distribution<double> e;
  std::vector<double> v(p->size());
  double s = 0.0;
  for (auto& x : v) s += (x = e(gen));
  for (auto& x : v) x /= s;
  return Histogram(p, v, HistogramKind::kProbability, true);
}

}  // namespace

TEST(Histogram, Validation) {
  const PartitionChain chain = dyadic_chain(Domain{}, 2);
  const auto& p = chain.level(1);
  EXPECT_THROW(Histogram(p, {0.5}, HistogramKind::kSigned), ValidationError);
  EXPECT_THROW(Histogram(p, {0.5, NAN}, HistogramKind::kSigned), NumericError);
  EXPECT_THROW(Histogram(p, {-0.5, 1.5}, HistogramKind::kPositive), ValidationError);
  EXPECT_THROW(Histogram(p, {0.5, 0.6}, HistogramKind::kProbability), ValidationError);
  EXPECT_NO_THROW(Histogram(p, {-0.5, 1.5}, HistogramKind::kSigned));
  const Histogram r(p, {1.0, 3.0}, HistogramKind::kProbability, true);
  EXPECT_DOUBLE_EQ(r[0], 0.25);
  EXPECT_THROW(Histogram(p, {0.0, 0.0}, HistogramKind::kProbability, true), DegenerateSystem);
  EXPECT_THROW(Histogram::zeros(p, HistogramKind::kProbability), ValidationError);
}

TEST(Histogram, ProjectionSumsGroupsAndComposes) {
  const PartitionChain chain = dyadic_chain(Domain{}, 6);
  std::mt19937 gen(11);
  for (int rep = 0; rep < 50; ++rep) {
    const Histogram h = random_probability(chain.level(6), gen);
    const Histogram stepwise = project(project(project(h, chain.step(6)), chain.step(5)), chain.step(4));
    const Histogram direct = project(h, chain.map(3, 6));
    ASSERT_EQ(stepwise.size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) {
      EXPECT_NEAR(stepwise[i], direct[i], 1e-15);
      double s = 0.0;
      for (std::size_t j = 8 * i; j < 8 * i + 8; ++j) s += h[j];
      EXPECT_NEAR(direct[i], s, 1e-15);
    }
    EXPECT_NEAR(direct.sum(), 1.0, 1e-12);
    // max over coarse cells dominates every fine cell for nonnegative histograms
    EXPECT_GE(*std::max_element(direct.values().begin(), direct.values().end()),
              *std::max_element(h.values().begin(), h.values().end()));
  }
}

TEST(Histogram, ProjectRejectsForeignPartition) {
  const PartitionChain a = dyadic_chain(Domain{}, 2);
  const PartitionChain b = dyadic_chain(Domain::parse("(0,2]"), 2);
  const Histogram h = Histogram::zeros(b.level(2));
  EXPECT_THROW(project(h, a.step(2)), PartitionMismatch);
}

TEST(Histogram, TruncationStatisticMonotoneInL) {
  const PartitionChain chain = dyadic_chain(Domain{}, 4);
  std::mt19937 gen(5);
  const Histogram q = lebesgue_histogram(chain.level(4));
  for (int rep = 0; rep < 100; ++rep) {
    const Histogram p = random_probability(chain.level(4), gen);
    double prev = truncation_statistic(p, q, 0.0);
    EXPECT_NEAR(prev, 1.0, 1e-12);
    for (double L : {0.5, 1.0, 2.0, 5.0, 20.0}) {
      const double s = truncation_statistic(p, q, L);
      EXPECT_LE(s, prev);
      prev = s;
    }
  }
  EXPECT_EQ(truncation_statistic(q, q, 1.0), 0.0);
}

TEST(Histogram, TvNormAndDensity) {
  const PartitionChain chain = dyadic_chain(Domain{}, 1);
  const Histogram p(chain.level(1), {0.25, 0.75}, HistogramKind::kProbability);
  const Histogram q(chain.level(1), {0.5, 0.5}, HistogramKind::kProbability);
  EXPECT_DOUBLE_EQ(tv_norm(Histogram(chain.level(1), {-1.0, 2.0}, HistogramKind::kSigned)), 3.0);
  const PiecewiseDensity d = histogram_density(p, q);
  EXPECT_DOUBLE_EQ(d.cell_values[0], 0.5);
  EXPECT_DOUBLE_EQ(d.cell_values[1], 1.5);
  const Histogram z(chain.level(1), {0.0, 1.0}, HistogramKind::kProbability);
  try {
    histogram_density(p, z);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.code(), "not_dominated");
  }
}

TEST(Measure, DescriptorOnPartitions) {
  const PartitionChain chain = dyadic_chain(Domain::parse("[0,1]"), 2);
  const MeasureDescriptor m{2.0, {{0.0, 1.0}, {0.5, 3.0}}};
  const auto v = m.on(*chain.level(2));
  ASSERT_EQ(v.size(), 5u);
  EXPECT_DOUBLE_EQ(v[0], 1.0);          // singleton {0}
  EXPECT_DOUBLE_EQ(v[1], 0.5);          // (0, 1/4]
  EXPECT_DOUBLE_EQ(v[2], 0.5 + 3.0);    // (1/4, 1/2] holds the atom at 1/2
  EXPECT_DOUBLE_EQ(v[3], 0.5);
  EXPECT_TRUE(m.has_atoms());
  EXPECT_FALSE(m.is_purely_atomic());
  EXPECT_TRUE((MeasureDescriptor{0.0, {{0.3, 1.0}}}).is_purely_atomic());
  EXPECT_THROW(MeasureDescriptor::lebesgue().on(*triangular_chain({{0.0}}).level(1)), DomainError);
}

TEST(Measure, BaseMeasureFromWeights) {
  const PartitionChain chain = dyadic_chain(Domain{}, 3);
  const BaseMeasure b(chain.level(3), {1, 0, 0, 2, 0, 0, 0, 1});
  const auto v = b.on(chain.level(1));
  EXPECT_DOUBLE_EQ(v[0], 3.0);
  EXPECT_DOUBLE_EQ(v[1], 1.0);
  EXPECT_DOUBLE_EQ(b.total(Domain{}), 4.0);
  EXPECT_THROW(BaseMeasure(chain.level(3), {1, 2}), ValidationError);
  EXPECT_THROW(BaseMeasure(MeasureDescriptor{-1.0, {}}), ValidationError);
}

TEST(Density, LinearDensityTvExact) {
  const PartitionChain chain = dyadic_chain(Domain{}, 8);
  const PolynomialDensity p{{0.0, 2.0}};
  for (int m = 1; m <= 8; ++m) {
    const Histogram mass = integrate_lebesgue(p, chain.level(m), HistogramKind::kProbability);
    PiecewiseDensity avg{chain.level(m), {}};
    for (std::size_t i = 0; i < mass.size(); ++i) avg.cell_values.push_back(mass[i] * std::ldexp(1.0, m));
    EXPECT_NEAR(tv_distance_density(p, avg, LebesgueReference{0, 1}), oracle::linear_density_tv(m), 1e-15);
  }
}

TEST(Density, QuadratureFallbackMatchesClosedForm) {
  // |sin(pi x) - 1/2| on [0,1]: integral = 2(sqrt3 - 1)/pi + 1/6 - ... computed in closed form.
  const FunctionDensity f{[](double x) { return std::sin(M_PI * x); }, "sin"};
  const PolynomialDensity half{{0.5}};
  const double a = 1.0 / 6.0, b = 5.0 / 6.0;
  const double inside = (std::cos(M_PI * a) - std::cos(M_PI * b)) / M_PI - 0.5 * (b - a);
  const double outside = 2.0 * (0.5 * a - (1.0 - std::cos(M_PI * a)) / M_PI);
  const double expected = 0.5 * (inside + outside);
  EXPECT_NEAR(tv_distance_density(f, half, LebesgueReference{0, 1}), expected, 1e-8);
}

TEST(Density, IdenticalDensitiesHaveZeroDistance) {
  const PolynomialDensity one{{1.0}};
  EXPECT_EQ(tv_distance_density(one, one, LebesgueReference{0, 1}), 0.0);
}
