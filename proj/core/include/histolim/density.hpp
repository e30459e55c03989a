#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "histolim/histogram.hpp"

namespace histolim {

/// sum_k coefficients[k] x^k.
struct PolynomialDensity {
  std::vector<double> coefficients;
  double operator()(double x) const;
};

struct FunctionDensity {
  std::function<double(double)> f;
  std::string name;
};

using Density = std::variant<PiecewiseDensity, PolynomialDensity, FunctionDensity>;

/// Lebesgue measure restricted to [a, b].
struct LebesgueReference {
  double a = 0.0;
  double b = 1.0;
};

using ReferenceMeasure = std::variant<LebesgueReference, Histogram>;

/// Evaluates a density at a point. Piecewise densities use the half-open
/// cell convention.
double evaluate(const Density& f, double x);

/// 1/2 * integral of |f - g| dq. Piecewise-constant and polynomial inputs up
/// to degree 2 are integrated exactly; anything else by composite Simpson
/// with halving until successive estimates differ by less than 1e-9. A
/// histogram reference requires piecewise densities on partitions it refines.
double tv_distance_density(const Density& f, const Density& g, const ReferenceMeasure& q);

/// Integral of f over each cell against Lebesgue measure (cells must be bounded).
Histogram integrate_lebesgue(const Density& f, const PartitionPtr& p, HistogramKind kind);

}  // namespace histolim
