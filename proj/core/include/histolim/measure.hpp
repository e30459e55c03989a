#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "histolim/histogram.hpp"

namespace histolim {

/// scale * Lebesgue + sum of point masses. Weights may be negative when the
/// descriptor is used as a signed centre measure.
struct MeasureDescriptor {
  double lebesgue_scale = 0.0;
  std::vector<std::pair<double, double>> atoms;  // (location, weight)

  static MeasureDescriptor lebesgue(double scale = 1.0) { return {scale, {}}; }
  static MeasureDescriptor zero() { return {}; }

  bool is_zero() const;
  bool has_atoms() const;
  bool is_purely_atomic() const { return lebesgue_scale == 0.0 && has_atoms(); }
  bool nonnegative() const;

  /// Measure of a cell; DomainError for an unbounded cell with scale != 0.
  double of(const Cell& cell) const;
  std::vector<double> on(const Partition& p) const;
};

/// A nonnegative base measure given either in closed form or as explicit
/// weights on a finest partition (then only coarser partitions are valid).
class BaseMeasure {
 public:
  BaseMeasure(MeasureDescriptor descriptor);  // NOLINT
  BaseMeasure(PartitionPtr finest, std::vector<double> weights);

  const std::optional<MeasureDescriptor>& descriptor() const noexcept { return descriptor_; }
  const PartitionPtr& finest() const noexcept { return finest_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// nu(A) for every cell of p.
  std::vector<double> on(const PartitionPtr& p) const;
  double total(const Domain& domain) const;
  /// True when nu is carried by finitely many points.
  bool purely_atomic() const;

 private:
  std::optional<MeasureDescriptor> descriptor_;
  PartitionPtr finest_;
  std::vector<double> weights_;
};

/// Lebesgue measure of each cell, scaled.
Histogram lebesgue_histogram(const PartitionPtr& p, double scale = 1.0);

}  // namespace histolim
