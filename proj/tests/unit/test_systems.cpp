#include <gtest/gtest.h>

#include <cmath>

#include "histolim/error.hpp"
#include "histolim/systems.hpp"

using namespace histolim;

TEST(BetaExpression, Evaluates) {
  EXPECT_EQ(BetaExpression::parse("1")(5), 1.0);
  EXPECT_EQ(BetaExpression::parse("m")(5), 5.0);
  EXPECT_EQ(BetaExpression::parse("m^2")(5), 25.0);
  EXPECT_EQ(BetaExpression::parse("2*m+1")(3), 7.0);
  EXPECT_EQ(BetaExpression::parse("2^m")(10), 1024.0);
  EXPECT_EQ(BetaExpression::parse("2^m^2")(2), 16.0);  // right associative
  EXPECT_EQ(BetaExpression::parse("(m+1)*(m+2)")(1), 6.0);
  EXPECT_TRUE(std::isinf(BetaExpression::parse("inf")(1)));
  EXPECT_EQ(BetaExpression::parse(" m ^ 2 ").text(), " m ^ 2 ");
}

TEST(BetaExpression, GrowthDegree) {
  EXPECT_EQ(BetaExpression::parse("3").growth_degree(), 0.0);
  EXPECT_EQ(BetaExpression::parse("m").growth_degree(), 1.0);
  EXPECT_EQ(BetaExpression::parse("m^2+m").growth_degree(), 2.0);
  EXPECT_EQ(BetaExpression::parse("m^0.5").growth_degree(), 0.5);
  EXPECT_EQ(BetaExpression::parse("0*m^3+1").growth_degree(), 0.0);
  EXPECT_TRUE(std::isinf(BetaExpression::parse("2^m").growth_degree()));
  EXPECT_EQ(BetaExpression::parse("0.5^m").growth_degree(), 0.0);
}

TEST(BetaExpression, RejectsMalformed) {
  for (const char* bad : {"", "m+", "(m", "x", "m**2", "1 2", "-1"}) {
    EXPECT_THROW(BetaExpression::parse(bad), ValidationError) << bad;
  }
}

TEST(BetaPair, Rules) {
  const BetaRule h = HomogeneousRule{BetaExpression::parse("m^2")};
  EXPECT_EQ(beta_pair(h, CellIndex()), (BetaPair{1.0, 1.0}));
  EXPECT_EQ(beta_pair(h, CellIndex::parse("01")), (BetaPair{9.0, 9.0}));

  const BetaRule d = DirichletRelationRule{MeasureDescriptor::lebesgue(4.0), Domain{}};
  EXPECT_EQ(beta_pair(d, CellIndex()), (BetaPair{2.0, 2.0}));
  EXPECT_EQ(beta_pair(d, CellIndex::parse("1")), (BetaPair{1.0, 1.0}));

  const BetaRule c = CantorTrigRule{};
  const auto [c0, c1] = beta_pair(c, CellIndex());
  EXPECT_NEAR(c0, std::cos(M_PI / 4), 1e-15);
  EXPECT_NEAR(c1, std::sin(M_PI / 4), 1e-15);
  const auto [z0, z1] = beta_pair(c, CellIndex::parse("0"));
  EXPECT_NEAR(z1 / z0, std::tan(M_PI / 12), 1e-15);

  TableRule t;
  t.nodes[CellIndex()] = {2.0, 1.0};
  t.levels[1] = {1.0, 3.0};
  t.fallback = {5.0, 5.0};
  const BetaRule tr = t;
  EXPECT_EQ(beta_pair(tr, CellIndex()), (BetaPair{2.0, 1.0}));
  EXPECT_EQ(beta_pair(tr, CellIndex::parse("1")), (BetaPair{1.0, 3.0}));
  EXPECT_EQ(beta_pair(tr, CellIndex::parse("10")), (BetaPair{5.0, 5.0}));
}

TEST(Systems, Validation) {
  EXPECT_NO_THROW(validate(DirichletSystem{}));
  EXPECT_THROW(validate(PolyaTreeSystem{HomogeneousRule{BetaExpression::parse("1")}, 1.0}), ValidationError);
  EXPECT_THROW(validate(LeakageSystem{1.0, false}), ValidationError);
  EXPECT_NO_THROW(validate(LeakageSystem{0.0, false}));
  EXPECT_THROW(validate(GaussianSystem{{}, ConstantCovariance{0.0, MeasureDescriptor::lebesgue()}}), ValidationError);
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  EXPECT_THROW(validate(GaussianSystem{{}, PointMassCovariance{{0.2, 0.7}, bad}}), InvalidCovariance);
  EXPECT_THROW(validate(GaussianSystem{{}, GreensCovariance{4, 0.1, 1, 0, 8}}), ValidationError);
  TableRule t;
  t.levels[0] = {-1.0, 1.0};
  EXPECT_THROW(validate(PolyaTreeSystem{t, 0.0}), ValidationError);
}

TEST(Systems, CompleteRandomness) {
  EXPECT_TRUE(completely_random(DirichletSystem{}));
  EXPECT_FALSE(completely_random(PolyaTreeSystem{}));
  EXPECT_TRUE(completely_random(GaussianSystem{}));
  EXPECT_FALSE(completely_random(GaussianSystem{{}, ConstantCovariance{}}));
  EXPECT_FALSE(completely_random(LeakageSystem{}));
  Eigen::MatrixXd diag = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_TRUE(completely_random(GaussianSystem{{}, PointMassCovariance{{0.2, 0.7}, diag}}));
  EXPECT_TRUE(probability_family(DirichletSystem{}));
  EXPECT_FALSE(probability_family(GaussianSystem{}));
}

TEST(Kernels, GreensAndStandardKernels) {
  EXPECT_DOUBLE_EQ(kernel_value(KernelCovariance{KernelType::kMin, 1, 1, 8}, 0.3, 0.7), 0.3);
  EXPECT_DOUBLE_EQ(kernel_value(KernelCovariance{KernelType::kExponential, 2, 3, 8}, 0.0, 1.0), 3 * std::exp(-0.5));
  EXPECT_DOUBLE_EQ(kernel_value(GreensCovariance{3, 0.1, 1, 0, 8}, 0.2, 0.5), 1.0 / 0.4);
  EXPECT_DOUBLE_EQ(kernel_value(GreensCovariance{2, 0.1, 1, 0, 8}, 0.2, 0.2), -std::log(0.1));
  EXPECT_THROW(kernel_value(DiagonalCovariance{}, 0.1, 0.2), Unsupported);
}
