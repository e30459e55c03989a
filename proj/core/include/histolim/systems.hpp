#pragma once

#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "histolim/beta_expression.hpp"
#include "histolim/measure.hpp"

namespace histolim {

// ---------------------------------------------------------------- Dirichlet

struct DirichletSystem {
  BaseMeasure base = MeasureDescriptor::lebesgue(1.0);
};

// ---------------------------------------------------------------- Polya

using BetaPair = std::pair<double, double>;

/// beta_e = beta_{|e|} for an expression in the level.
struct HomogeneousRule {
  BetaExpression expr;
};

/// beta_e = nu(A_e) on the dyadic tree of `domain`.
struct DirichletRelationRule {
  MeasureDescriptor measure = MeasureDescriptor::lebesgue(1.0);
  Domain domain;
};

/// (beta_e0, beta_e1) = (cos(pi/2 x(e)), sin(pi/2 x(e))) with x the Cantor midpoint.
struct CantorTrigRule {};

/// Explicit pairs per parent node, then per parent level, then a fallback.
struct TableRule {
  std::map<CellIndex, BetaPair> nodes;
  std::map<int, BetaPair> levels;
  BetaPair fallback{1.0, 1.0};
};

using BetaRule = std::variant<HomogeneousRule, DirichletRelationRule, CantorTrigRule, TableRule>;

/// The pair (beta_{e0}, beta_{e1}) governing the split of cell A_e.
BetaPair beta_pair(const BetaRule& rule, const CellIndex& parent);
std::string rule_name(const BetaRule& rule);

struct PolyaTreeSystem {
  BetaRule rule = HomogeneousRule{BetaExpression::parse("1")};
  /// Mass of the singleton {a} on closed domains [a, b].
  double p0 = 0.0;
};

// ---------------------------------------------------------------- Gaussian

struct DiagonalCovariance {
  MeasureDescriptor sigma2 = MeasureDescriptor::lebesgue(1.0);
};

/// c * mu(A_i) mu(A_j).
struct ConstantCovariance {
  double c = 1.0;
  MeasureDescriptor mu = MeasureDescriptor::lebesgue(1.0);
};

/// Sigma supported on S x S.
struct PointMassCovariance {
  std::vector<double> sites;
  Eigen::MatrixXd sigma0;
};

enum class KernelType { kMin, kExponential, kSquaredExponential };

struct KernelCovariance {
  KernelType type = KernelType::kExponential;
  double length = 1.0;
  double variance = 1.0;
  int order = 8;
};

/// Regularized Green's functions: d = 1: -|x-y| + c0 + c1 (x+y);
/// d = 2: -log(|x-y| + cutoff); d = 3: 1/(|x-y| + cutoff).
struct GreensCovariance {
  int dimension = 2;
  double cutoff = 0.01;
  double c0 = 1.0;
  double c1 = 0.0;
  int order = 8;
};

using CovarianceSpec = std::variant<DiagonalCovariance, ConstantCovariance, PointMassCovariance,
                                    KernelCovariance, GreensCovariance>;

std::string covariance_name(const CovarianceSpec& spec);
/// Pointwise kernel for the kernel and Green's variants.
double kernel_value(const CovarianceSpec& spec, double x, double y);

struct GaussianSystem {
  MeasureDescriptor centre;  // zero by default
  CovarianceSpec covariance = DiagonalCovariance{};

  bool centred() const { return centre.is_zero(); }
};

// ---------------------------------------------------------------- Leakage

/// Deterministic system on a triangular chain of the real line: mass delta/2
/// in each outer cell, the rest spread uniformly over (-1, 1]. With
/// `boundary` set the construction is carried to [0, 1] by
/// s = 1/2 + arctan(q)/pi, with empty singletons {0} and {1}.
struct LeakageSystem {
  double delta = 0.2;
  bool boundary = false;
};

using HistogramSystem = std::variant<DirichletSystem, PolyaTreeSystem, GaussianSystem, LeakageSystem>;

std::string family_name(const HistogramSystem& sys);
/// Masses of disjoint sets independent (up to normalization).
bool completely_random(const HistogramSystem& sys);
bool probability_family(const HistogramSystem& sys);

/// Throws ValidationError when the parameters are out of range.
void validate(const HistogramSystem& sys);

}  // namespace histolim
