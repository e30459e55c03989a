#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>

#include "histolim/diagnostics.hpp"
#include "histolim/error.hpp"
#include "oracles.hpp"

using namespace histolim;

namespace {

PolyaTreeSystem homogeneous(const char* beta) { return PolyaTreeSystem{HomogeneousRule{BetaExpression::parse(beta)}, 0.0}; }

MonteCarloConfig mc(std::uint64_t seed, std::size_t n, int jobs = 0) { return MonteCarloConfig{seed, n, jobs}; }

}  // namespace

TEST(ParallelFor, CoversEveryIndexAndRethrows) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw ValidationError("boom");
               }),
               ValidationError);
}

TEST(Coherence, ConsistentSystemsPass) {
  const PartitionChain chain = dyadic_chain(Domain{}, 4);
  EXPECT_TRUE(coherence_majority(DirichletSystem{}, chain, 3, mc(11, 4000)).pass);
  EXPECT_TRUE(coherence_majority(homogeneous("m"), chain, 4, mc(12, 4000)).pass);
  EXPECT_TRUE(coherence_majority(GaussianSystem{}, chain, 2, mc(13, 4000)).pass);
}

TEST(Coherence, MismatchedOracleFails) {
  const PartitionChain chain = dyadic_chain(Domain{}, 3);
  TableRule skewed;
  skewed.levels[0] = {3.0, 1.0};
  skewed.fallback = {1.0, 1.0};
  const CoherenceMajority r =
      coherence_majority(homogeneous("1"), chain, 2, mc(14, 4000), HistogramSystem{PolyaTreeSystem{skewed, 0.0}});
  EXPECT_FALSE(r.pass);
  ASSERT_EQ(r.runs.size(), 3u);
  for (const auto& run : r.runs) EXPECT_GT(run.max_abs_z, kCoherenceThreshold);
}

TEST(Coherence, ResultShapeAndSampleFloor) {
  const PartitionChain chain = dyadic_chain(Domain{}, 3);
  const CoherenceResult r = coherence_test(DirichletSystem{}, chain, 3, mc(15, 1000));
  EXPECT_EQ(r.coarse_level, 2u);
  EXPECT_EQ(r.z_first.size(), 4u);
  EXPECT_EQ(r.z_second.size(), 10u);
  try {
    coherence_test(DirichletSystem{}, chain, 3, mc(15, 999));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.code(), "insufficient_samples");
  }
}

TEST(Coherence, DeterministicAcrossJobCounts) {
  const PartitionChain chain = dyadic_chain(Domain{}, 3);
  const CoherenceResult a = coherence_test(DirichletSystem{}, chain, 3, mc(16, 1500, 1));
  const CoherenceResult b = coherence_test(DirichletSystem{}, chain, 3, mc(16, 1500, 4));
  EXPECT_EQ(a.z_first, b.z_first);
  EXPECT_EQ(a.z_second, b.z_second);
}

TEST(Atomicity, DirichletMatchesStickBreaking) {
  const PartitionChain chain = dyadic_chain(Domain{}, 12);
  const auto curve = atomicity_statistic(DirichletSystem{}, chain, {2, 6, 12}, mc(17, 3000));
  const auto [mean, se] = oracle::stick_breaking_max_atom(1.0, 20000, 99);
  // The largest cell holds the largest atom plus a few small ones.
  EXPECT_GE(curve.back().mean + 4 * curve.back().stderr_, mean - 4 * se);
  EXPECT_LT(std::abs(curve.back().mean - mean), 4 * std::hypot(curve.back().stderr_, se) + 0.01);
  EXPECT_EQ(atomicity_trend(curve), AtomicityTrend::kPlateau);
  for (std::size_t k = 1; k < curve.size(); ++k) EXPECT_LE(curve[k].mean, curve[k - 1].mean);
}

TEST(Atomicity, SmoothPolyaDecreases) {
  const PartitionChain chain = dyadic_chain(Domain{}, 10);
  const auto curve = atomicity_statistic(homogeneous("m^2"), chain, {2, 6, 10}, mc(18, 2000));
  EXPECT_EQ(atomicity_trend(curve), AtomicityTrend::kDecreasing);
}

TEST(Atomicity, MaxCellShareUsesAbsoluteValues) {
  const PartitionChain chain = dyadic_chain(Domain{}, 2);
  const Histogram h(chain.level(2), {0.5, -1.5, 0.5, 0.5}, HistogramKind::kSigned);
  EXPECT_DOUBLE_EQ(max_cell_share(h), 0.5);
}

TEST(Domination, MonotoneInL) {
  const PartitionChain chain = dyadic_chain(Domain{}, 6);
  const std::vector<double> L{0.5, 1.0, 2.0, 5.0};
  const DominationResult r = domination_statistic(homogeneous("m^2"), chain, {2, 6}, L, 0.1, mc(19, 1000));
  ASSERT_EQ(r.curve.size(), 8u);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t l = 1; l < L.size(); ++l) {
      EXPECT_LE(r.curve[k * L.size() + l].mean, r.curve[k * L.size() + l - 1].mean);
      EXPECT_LE(r.curve[k * L.size() + l].tail, r.curve[k * L.size() + l - 1].tail);
    }
  }
  EXPECT_TRUE(r.uncovered_depths.empty());
  // L below 1 leaves at least 1 - L of a probability histogram.
  EXPECT_GE(r.curve[0].mean, 0.5 - 1e-12);
}

TEST(Domination, UncoveredCellsReported) {
  const PartitionChain chain = dyadic_chain(Domain{}, 4);
  const DirichletSystem atoms{MeasureDescriptor{0.0, {{0.3, 1.0}}}};
  const DominationResult r = domination_statistic(atoms, chain, {4}, {1.0}, 0.1, mc(20, 1000));
  EXPECT_TRUE(r.uncovered_depths.empty());
  EXPECT_NEAR(r.curve[0].mean, 0.0, 1e-12);
}

TEST(TvCurve, LinearDensityClosedForm) {
  const PartitionChain chain = dyadic_chain(Domain{}, 10);
  const auto curve = tv_martingale_curve(PolynomialDensity{{0.0, 2.0}}, chain, 10);
  ASSERT_EQ(curve.size(), 10u);
  for (int m = 1; m <= 10; ++m) EXPECT_NEAR(curve[m - 1], oracle::linear_density_tv(m), 1e-12) << m;
  const PartitionChain line = leakage_chain(4, false);
  EXPECT_THROW(tv_martingale_curve(PolynomialDensity{{1.0}}, line, 2), ValidationError);
}

TEST(QuadraticVariation, FlatAndLinearPaths) {
  std::vector<PathPoint> flat, linear;
  const int n = 64;
  for (int k = 0; k <= n; ++k) {
    flat.push_back({k / double(n), 0.3});
    linear.push_back({k / double(n), k / double(n)});
  }
  EXPECT_EQ(quadratic_variation(flat), 0.0);
  EXPECT_NEAR(quadratic_variation(linear), 1.0 / n, 1e-15);
}

TEST(Phase, DeterministicVerdictsWithoutMonteCarlo) {
  PhaseConfig cfg;
  cfg.monte_carlo = false;
  const PartitionChain chain = dyadic_chain(Domain{}, 8);
  EXPECT_EQ(phase_report(homogeneous("m^2"), chain, cfg).declared_phase, Phase::kAbsolutelyContinuous);
  EXPECT_EQ(phase_report(DirichletSystem{MeasureDescriptor{0.0, {{0.3, 1.0}}}}, chain, cfg).declared_phase,
            Phase::kFixedAtomic);
  EXPECT_EQ(phase_report(GaussianSystem{{}, ConstantCovariance{}}, chain, cfg).declared_phase,
            Phase::kAbsolutelyContinuous);
  const PhaseReport leak = phase_report(LeakageSystem{}, leakage_chain(8, false), cfg);
  EXPECT_EQ(leak.declared_phase, Phase::kInconclusive);
  EXPECT_EQ(leak.anchor, "P-tight");
  EXPECT_STREQ(to_string(Phase::kContinuousSingular), "continuous-singular");
}

TEST(Atomicity, ProjectedMaxDominatesFineMax) {
  const PartitionChain chain = dyadic_chain(Domain{}, 6);
  RandomStream s(21, 0);
  for (int k = 0; k < 200; ++k) {
    const auto levels = chain_sample(DirichletSystem{}, chain, 6, s);
    for (std::size_t m = 1; m <= 6; ++m) {
      const auto& coarse = levels[m - 1].values();
      const auto& fine = levels[m].values();
      EXPECT_GE(*std::max_element(coarse.begin(), coarse.end()), *std::max_element(fine.begin(), fine.end()));
    }
  }
}

TEST(Domination, DominatedAndAtomicExamples) {
  const PartitionChain chain = dyadic_chain(Domain{}, 10);
  const std::vector<int> depths{2, 4, 6, 8, 10};
  const DominationResult polya = domination_statistic(homogeneous("m^2"), chain, depths, {20.0}, 0.1, mc(22, 2000));
  for (const auto& p : polya.curve) EXPECT_LT(p.tail, 0.05) << p.depth;
  const DominationResult dir = domination_statistic(DirichletSystem{}, chain, depths, {5.0}, 0.1, mc(23, 2000));
  EXPECT_GT(dir.curve.back().tail, 0.95);
  for (std::size_t k = 1; k < dir.curve.size(); ++k) EXPECT_GE(dir.curve[k].tail, dir.curve[k - 1].tail);
}

TEST(TvCurve, IdenticalDensitiesAndDepthEight) {
  const PartitionChain chain = dyadic_chain(Domain{}, 8);
  for (double v : tv_martingale_curve(PolynomialDensity{{1.0}}, chain, 8)) EXPECT_EQ(v, 0.0);
  EXPECT_LT(tv_martingale_curve(PolynomialDensity{{0.0, 2.0}}, chain, 8).back(), 0.002);
}

TEST(QuadraticVariation, NeedsTwoPoints) {
  EXPECT_THROW(quadratic_variation({{0.0, 0.0}}), ValidationError);
}
