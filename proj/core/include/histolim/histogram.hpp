#pragma once

#include <cstddef>
#include <vector>

#include "histolim/partition.hpp"

namespace histolim {

enum class HistogramKind { kProbability, kPositive, kSigned };

const char* to_string(HistogramKind kind);

/// Values of a measure on the cells of a partition.
class Histogram {
 public:
  static constexpr double kProbabilityTolerance = 1e-12;

  /// Validates the values against `kind`. Probability histograms whose sum is
  /// off by more than the tolerance are rejected unless `renormalize` is set.
  Histogram(PartitionPtr partition, std::vector<double> values, HistogramKind kind,
            bool renormalize = false);

  static Histogram zeros(PartitionPtr partition, HistogramKind kind = HistogramKind::kSigned);

  const PartitionPtr& partition() const noexcept { return partition_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double value(std::size_t i) const { return values_.at(i); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }
  HistogramKind kind() const noexcept { return kind_; }
  double sum() const;

  friend Histogram project(const Histogram& h, const RefinementMap& map);
  friend bool operator==(const Histogram& a, const Histogram& b) {
    return a.kind_ == b.kind_ && a.values_ == b.values_ &&
           (a.partition_ == b.partition_ || *a.partition_ == *b.partition_);
  }

 private:
  struct Unchecked {};
  Histogram(Unchecked, PartitionPtr partition, std::vector<double> values, HistogramKind kind)
      : partition_(std::move(partition)), values_(std::move(values)), kind_(kind) {}

  PartitionPtr partition_;
  std::vector<double> values_;
  HistogramKind kind_;
};

/// Throws PartitionMismatch unless both live on the same partition.
void require_same_partition(const Partition& a, const Partition& b);

/// Coarse value i is the sum over J(i) in ascending fine order.
Histogram project(const Histogram& h, const RefinementMap& map);

double tv_norm(const Histogram& h);

/// Sum over cells of (p(A) - L q(A))_+.
double truncation_statistic(const Histogram& p, const Histogram& q, double L);

/// Cell-averaged density with respect to a reference histogram.
struct PiecewiseDensity {
  PartitionPtr partition;
  std::vector<double> cell_values;
};

/// p(A)/q(A) per cell, 0 where q(A) = p(A) = 0.
PiecewiseDensity histogram_density(const Histogram& p, const Histogram& q);

}  // namespace histolim
