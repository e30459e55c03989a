#include <gtest/gtest.h>

#include <cmath>

#include "histolim/conditions.hpp"
#include "histolim/error.hpp"

using namespace histolim;

namespace {

PolyaTreeSystem homogeneous(const char* beta) { return PolyaTreeSystem{HomogeneousRule{BetaExpression::parse(beta)}, 0.0}; }

// sum_{m<M} log(1 + tan(pi/2 * x(o_m))) with x(o_m) = 3^{-m}/2, computed directly.
double cantor_partial_sum(int M) {
  double s = 0.0;
  for (int m = 0; m < M; ++m) s += std::log1p(std::tan(0.5 * M_PI * 0.5 * std::pow(3.0, -m)));
  return s;
}

}  // namespace

TEST(PolyaTight, HomogeneousHolds) {
  for (const char* beta : {"1", "m", "m^2", "2^m", "0.5^m"}) {
    const Verdict v = polya_tight_condition(homogeneous(beta), CellIndex());
    EXPECT_EQ(v.status, VerdictStatus::kHolds) << beta;
    EXPECT_FALSE(v.argument.empty());
    EXPECT_EQ(v.anchor, "P-tight");
    ASSERT_EQ(v.evidence.size(), static_cast<std::size_t>(kProductDepth));
    EXPECT_NEAR(v.evidence.back().second, kProductDepth * std::log(2.0), 1e-9);
  }
}

TEST(PolyaTight, CantorTrigFailsWithGeometricTail) {
  const Verdict v = polya_tight_condition(PolyaTreeSystem{CantorTrigRule{}, 0.0}, CellIndex());
  EXPECT_EQ(v.status, VerdictStatus::kFails);
  EXPECT_EQ(v.argument, "tan_convexity_ratio_one_third");
  const auto& ratios = v.auxiliary.at("dominating_term_ratio");
  ASSERT_FALSE(ratios.empty());
  for (const auto& [m, r] : ratios) EXPECT_LE(r, 1.0 / 3) << m;
  for (int M : {1, 5, 20, 40}) EXPECT_NEAR(v.evidence[static_cast<std::size_t>(M - 1)].second, cantor_partial_sum(M), 1e-12);
  ASSERT_TRUE(v.extrapolation.has_value());
  // The bound exceeds the limit of the partial sums.
  EXPECT_GE(v.extrapolation->value, cantor_partial_sum(80) - 1e-12);
  EXPECT_LT(v.extrapolation->value, 3.0 * M_PI / 8.0 + 1.0);
  EXPECT_EQ(certify_geometric_tail({1, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125,
                                    0.0009765625})
                .value(),
            0.5);
}

TEST(PolyaTight, CantorTrigHoldsAwayFromTheLeftEdge) {
  const Verdict v = polya_tight_condition(PolyaTreeSystem{CantorTrigRule{}, 0.0}, CellIndex::parse("01"));
  EXPECT_EQ(v.status, VerdictStatus::kHolds);
  const Verdict all = polya_tight_all_prefixes(PolyaTreeSystem{CantorTrigRule{}, 0.0});
  EXPECT_EQ(all.status, VerdictStatus::kFails);
}

TEST(PolyaTight, TableUsesEventuallyConstantFallback) {
  TableRule t;
  t.levels[0] = {1.0, 1.0};
  t.fallback = {1.0, 1.0};
  EXPECT_EQ(polya_tight_all_prefixes(PolyaTreeSystem{t, 0.0}).status, VerdictStatus::kHolds);
  TableRule z;
  z.fallback = {INFINITY, 1.0};  // share 1 to the left child: zero terms
  const Verdict v = polya_tight_all_prefixes(PolyaTreeSystem{z, 0.0});
  EXPECT_EQ(v.status, VerdictStatus::kFails);
  EXPECT_EQ(v.argument, "eventually_zero_terms");
  TableRule one_prefix;
  one_prefix.nodes[CellIndex::parse("1")] = {INFINITY, 1.0};
  one_prefix.fallback = {1.0, 1.0};
  EXPECT_EQ(polya_tight_all_prefixes(PolyaTreeSystem{one_prefix, 0.0}).status, VerdictStatus::kHolds);
}

TEST(PolyaTight, DepthCapacity) {
  EXPECT_THROW(polya_tight_condition(homogeneous("1"), CellIndex::zeros(30), 40), CapacityError);
}

TEST(PolyaLeakage, CantorSymmetry) {
  const Verdict v = polya_leakage_condition(PolyaTreeSystem{CantorTrigRule{}, 0.0});
  EXPECT_EQ(v.status, VerdictStatus::kFails);
  const auto& o = v.auxiliary.at("o_path_partial_sum");
  ASSERT_EQ(o.size(), v.evidence.size());
  for (std::size_t m = 0; m < o.size(); ++m) EXPECT_NEAR(o[m].second, v.evidence[m].second, 1e-12);
}

TEST(PolyaLeakage, DirichletRelationAtomAtRightEndpoint) {
  const DirichletRelationRule plain{MeasureDescriptor::lebesgue(), Domain{}};
  EXPECT_EQ(polya_leakage_condition(PolyaTreeSystem{plain, 0.0}).status, VerdictStatus::kHolds);
  const DirichletRelationRule atom{MeasureDescriptor{1.0, {{1.0, 0.5}}}, Domain{}};
  EXPECT_EQ(polya_leakage_condition(PolyaTreeSystem{atom, 0.0}).status, VerdictStatus::kFails);
}

TEST(PolyaWeak, HomogeneousClosedForm) {
  const Verdict lin = polya_weak_condition(homogeneous("m"));
  EXPECT_EQ(lin.status, VerdictStatus::kHolds);
  for (const auto& [m, w] : lin.evidence) {
    EXPECT_NEAR(w, std::pow(1.0 + 1.0 / (2.0 * m + 1.0), m), 1e-12);
    EXPECT_LE(w, std::exp(0.5));
  }
  const Verdict one = polya_weak_condition(homogeneous("1"));
  EXPECT_EQ(one.status, VerdictStatus::kSufficientConditionFails);
  EXPECT_NEAR(one.evidence.back().second, std::pow(4.0 / 3.0, kProductDepth), 1e-6 * std::pow(4.0 / 3.0, kProductDepth));
  EXPECT_EQ(polya_weak_condition(homogeneous("m^2")).status, VerdictStatus::kHolds);
  EXPECT_EQ(polya_weak_condition(homogeneous("m^0.5")).status, VerdictStatus::kSufficientConditionFails);
  EXPECT_EQ(polya_weak_condition(homogeneous("inf")).status, VerdictStatus::kHolds);
}

TEST(PolyaWeak, LevelSumsAgreeWithEnumeration) {
  // Homogeneous level sums are products; the table path enumerates nodes.
  TableRule t;
  for (int l = 0; l < 10; ++l) t.levels[l] = {static_cast<double>(l + 1), static_cast<double>(l + 1)};
  t.fallback = {11.0, 11.0};
  const auto enumerated = polya_weak_level_sums(PolyaTreeSystem{t, 0.0}, 10);
  const auto product = polya_weak_level_sums(homogeneous("m"), 10);
  ASSERT_EQ(enumerated.size(), product.size());
  for (std::size_t k = 0; k < product.size(); ++k) EXPECT_NEAR(enumerated[k], product[k], 1e-12 * product[k]);
}

TEST(PolyaWeak, DirichletRelationAndCantor) {
  const DirichletRelationRule d{MeasureDescriptor::lebesgue(2.0), Domain{}};
  const auto sums = polya_weak_level_sums(PolyaTreeSystem{d, 0.0}, 8);
  TableRule equivalent;  // beta_e = 2 * 2^{-|e|-1} for each child
  for (int l = 0; l < 8; ++l) equivalent.levels[l] = {std::ldexp(2.0, -(l + 1)), std::ldexp(2.0, -(l + 1))};
  const auto direct = polya_weak_level_sums(PolyaTreeSystem{equivalent, 0.0}, 8);
  for (std::size_t k = 0; k < sums.size(); ++k) EXPECT_NEAR(sums[k], direct[k], 1e-12 * direct[k]);
  EXPECT_EQ(polya_weak_condition(PolyaTreeSystem{d, 0.0}).status, VerdictStatus::kSufficientConditionFails);
  EXPECT_EQ(polya_weak_condition(PolyaTreeSystem{CantorTrigRule{}, 0.0}, 12).status,
            VerdictStatus::kSufficientConditionFails);
}

TEST(Gaussian, ConstantKernelExactStatistics) {
  const PartitionChain chain = dyadic_chain(Domain{}, 8);
  const auto verdicts = gaussian_conditions(GaussianSystem{{}, ConstantCovariance{}}, chain, 8);
  ASSERT_EQ(verdicts.size(), 3u);  // spectral, weak, trace
  for (const auto& v : verdicts) {
    if (v.condition == "gaussian_spectral") {
      for (const auto& [m, x] : v.evidence) EXPECT_EQ(x, 1.0) << m;
      EXPECT_EQ(v.status, VerdictStatus::kSufficientConditionFails);
    }
    if (v.condition == "gaussian_weak") {
      for (const auto& [m, x] : v.evidence) EXPECT_NEAR(x, 1.0, 1e-12) << m;
      EXPECT_EQ(v.status, VerdictStatus::kHolds);
      EXPECT_EQ(v.anchor, "P-weak-signed");
    }
  }
}

TEST(Gaussian, DiagonalLebesgueAndAtoms) {
  const PartitionChain chain = dyadic_chain(Domain{}, 10);
  const auto leb = gaussian_conditions(GaussianSystem{}, chain, 10);
  EXPECT_EQ(leb[0].condition, "gaussian_diagonal_vague");
  EXPECT_EQ(leb[0].status, VerdictStatus::kHolds);
  EXPECT_DOUBLE_EQ(leb[0].evidence.back().second, std::ldexp(1.0, -10));
  EXPECT_EQ(leb[2].status, VerdictStatus::kSufficientConditionFails);
  EXPECT_NEAR(leb[2].evidence.back().second, std::sqrt(1024.0), 1e-9);
  const GaussianSystem atoms{{}, DiagonalCovariance{MeasureDescriptor{0.0, {{0.3, 1.0}}}}};
  const auto a = gaussian_conditions(atoms, chain, 10);
  EXPECT_EQ(a[0].status, VerdictStatus::kSufficientConditionFails);
  EXPECT_EQ(a[2].status, VerdictStatus::kHolds);
}

TEST(Dirichlet, Conditions) {
  EXPECT_EQ(dirichlet_condition(DirichletSystem{}, Domain{}).status, VerdictStatus::kHolds);
  EXPECT_EQ(dirichlet_weak_condition(DirichletSystem{}, Domain{}).status, VerdictStatus::kSufficientConditionFails);
  const DirichletSystem atomic{MeasureDescriptor{0.0, {{0.2, 1.0}}}};
  EXPECT_EQ(dirichlet_weak_condition(atomic, Domain{}).status, VerdictStatus::kHolds);
  EXPECT_THROW(dirichlet_condition(DirichletSystem{MeasureDescriptor::zero()}, Domain{}), DegenerateSystem);
}

TEST(Leakage, OutsideMassIsExactlyDelta) {
  const LeakageReport r = leakage_counterexample(0.2, 12);
  ASSERT_EQ(r.summary.size(), 11u);
  for (const auto& row : r.summary) {
    EXPECT_TRUE(row.escaped);
    EXPECT_DOUBLE_EQ(row.outside_mass, 0.2);
  }
  // Candidate compacts are 2^-1 .. 2^12 at each of the 11 depths.
  EXPECT_EQ(r.rows.size(), 11u * 14u);
  EXPECT_EQ(r.boundary_rows.size(), 11u * 11u);
  EXPECT_EQ(r.verdict.status, VerdictStatus::kFails);
  EXPECT_EQ(r.verdict.anchor, "P-tight");
  EXPECT_EQ(leakage_tight_condition(LeakageSystem{0.0, false}, 8).status, VerdictStatus::kHolds);
  EXPECT_THROW(leakage_counterexample(1.0, 8), ValidationError);
  EXPECT_THROW(leakage_counterexample(0.2, 1), ValidationError);
}

TEST(PolyaTight, PartialSumsGrowLinearlyWhenRatioBounded) {
  TableRule t;
  t.fallback = {1.0, 0.25};  // beta_1 / beta_0 = r = 1/4 everywhere
  const Verdict v = polya_tight_condition(PolyaTreeSystem{t, 0.0}, CellIndex());
  EXPECT_EQ(v.status, VerdictStatus::kHolds);
  for (const auto& [M, s] : v.evidence) EXPECT_GE(s, M * std::log1p(0.25) - 1e-12);
}
