#include "histolim/histogram.hpp"

#include <cmath>

#include "histolim/error.hpp"

namespace histolim {

const char* to_string(HistogramKind kind) {
  switch (kind) {
    case HistogramKind::kProbability:
      return "probability";
    case HistogramKind::kPositive:
      return "positive";
    case HistogramKind::kSigned:
      break;
  }
  return "signed";
}

Histogram::Histogram(PartitionPtr partition, std::vector<double> values, HistogramKind kind,
                     bool renormalize)
    : partition_(std::move(partition)), values_(std::move(values)), kind_(kind) {
  if (!partition_) throw ValidationError("histogram without partition");
  if (values_.size() != partition_->size()) {
    throw ValidationError("histogram has " + std::to_string(values_.size()) + " values for " +
                          std::to_string(partition_->size()) + " cells");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw NumericError("non-finite histogram value in cell " + std::to_string(i));
    }
    if (kind_ != HistogramKind::kSigned && values_[i] < 0.0) {
      throw ValidationError("negative value " + std::to_string(values_[i]) + " in cell " +
                            std::to_string(i) + " of a " + to_string(kind_) + " histogram");
    }
  }
  if (kind_ == HistogramKind::kProbability) {
    const double total = sum();
    if (renormalize) {
      if (!(total > 0.0)) throw DegenerateSystem("cannot renormalize a histogram of total mass 0");
      for (double& v : values_) v /= total;
    } else if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw ValidationError("probability histogram sums to " + std::to_string(total));
    }
  }
}

Histogram Histogram::zeros(PartitionPtr partition, HistogramKind kind) {
  if (kind == HistogramKind::kProbability) throw ValidationError("zero histogram cannot be a probability");
  const std::size_t n = partition ? partition->size() : 0;
  return Histogram(std::move(partition), std::vector<double>(n, 0.0), kind);
}

double Histogram::sum() const {
  double total = 0.0;
  for (double v : values_) total += v;
  return total;
}

void require_same_partition(const Partition& a, const Partition& b) {
  if (&a != &b && !(a == b)) throw PartitionMismatch("histograms live on different partitions");
}

Histogram project(const Histogram& h, const RefinementMap& map) {
  require_same_partition(*h.partition(), *map.fine);
  std::vector<double> coarse(map.groups.size(), 0.0);
  for (std::size_t i = 0; i < map.groups.size(); ++i) {
    double s = 0.0;
    for (std::size_t j : map.groups[i]) s += h[j];
    coarse[i] = s;
  }
  // Regrouped sums can drift from 1 by rounding; the kind is kept as is.
  return Histogram(Histogram::Unchecked{}, map.coarse, std::move(coarse), h.kind());
}

double tv_norm(const Histogram& h) {
  double total = 0.0;
  for (double v : h.values()) total += std::abs(v);
  return total;
}

double truncation_statistic(const Histogram& p, const Histogram& q, double L) {
  require_same_partition(*p.partition(), *q.partition());
  if (!(L >= 0.0)) throw ValidationError("truncation level must be nonnegative");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] < 0.0) throw ValidationError("reference histogram is negative in cell " + std::to_string(i));
    const double excess = p[i] - L * q[i];
    if (excess > 0.0) total += excess;
  }
  return total;
}

PiecewiseDensity histogram_density(const Histogram& p, const Histogram& q) {
  require_same_partition(*p.partition(), *q.partition());
  PiecewiseDensity d{p.partition(), std::vector<double>(p.size(), 0.0)};
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] < 0.0) throw ValidationError("reference histogram is negative in cell " + std::to_string(i));
    if (q[i] == 0.0) {
      if (p[i] != 0.0) {
        throw ValidationError("cell " + p.partition()->cell(i).to_string() +
                                  " has reference mass 0 but mass " + std::to_string(p[i]),
                              "not_dominated");
      }
      continue;
    }
    d.cell_values[i] = p[i] / q[i];
  }
  return d;
}

}  // namespace histolim
