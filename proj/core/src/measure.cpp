#include "histolim/measure.hpp"

#include <cmath>
#include <numeric>

#include "histolim/error.hpp"

namespace histolim {

bool MeasureDescriptor::is_zero() const {
  if (lebesgue_scale != 0.0) return false;
  for (const auto& [x, w] : atoms) {
    if (w != 0.0) return false;
  }
  return true;
}

bool MeasureDescriptor::has_atoms() const {
  for (const auto& [x, w] : atoms) {
    if (w != 0.0) return true;
  }
  return false;
}

bool MeasureDescriptor::nonnegative() const {
  if (lebesgue_scale < 0.0) return false;
  for (const auto& [x, w] : atoms) {
    if (w < 0.0) return false;
  }
  return true;
}

double MeasureDescriptor::of(const Cell& cell) const {
  double total = 0.0;
  if (lebesgue_scale != 0.0) {
    if (!cell.singleton && !cell.bounded()) {
      throw DomainError("Lebesgue part is infinite on the unbounded cell " + cell.to_string());
    }
    total += lebesgue_scale * cell.length();
  }
  for (const auto& [x, w] : atoms) {
    if (w != 0.0 && cell.contains(exact_rational(x))) total += w;
  }
  return total;
}

std::vector<double> MeasureDescriptor::on(const Partition& p) const {
  std::vector<double> out(p.size(), 0.0);
  if (lebesgue_scale != 0.0) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Cell& c = p.cell(i);
      if (c.singleton) continue;
      if (!c.bounded()) throw DomainError("Lebesgue part is infinite on the unbounded cell " + c.to_string());
      out[i] = lebesgue_scale * c.length();
    }
  }
  for (const auto& [x, w] : atoms) {
    if (w == 0.0) continue;
    const Rational r = exact_rational(x);
    if (!p.domain().contains(r)) throw DomainError("atom at " + std::to_string(x) + " outside the domain");
    out[cell_of(p, r)] += w;
  }
  return out;
}

BaseMeasure::BaseMeasure(MeasureDescriptor descriptor) : descriptor_(std::move(descriptor)) {
  if (!descriptor_->nonnegative()) throw ValidationError("base measure must be nonnegative");
  for (const auto& [x, w] : descriptor_->atoms) {
    if (!std::isfinite(x) || !std::isfinite(w)) throw ValidationError("atoms must be finite");
  }
  if (!std::isfinite(descriptor_->lebesgue_scale)) throw ValidationError("scale must be finite");
}

BaseMeasure::BaseMeasure(PartitionPtr finest, std::vector<double> weights)
    : finest_(std::move(finest)), weights_(std::move(weights)) {
  if (!finest_) throw ValidationError("weights need a partition");
  if (weights_.size() != finest_->size()) throw ValidationError("one weight per finest cell required");
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("base weights must be finite and nonnegative");
  }
}

std::vector<double> BaseMeasure::on(const PartitionPtr& p) const {
  if (descriptor_) return descriptor_->on(*p);
  const RefinementMap map = refine_map(p, finest_);
  std::vector<double> out(map.groups.size(), 0.0);
  for (std::size_t i = 0; i < map.groups.size(); ++i) {
    for (std::size_t j : map.groups[i]) out[i] += weights_[j];
  }
  return out;
}

double BaseMeasure::total(const Domain& domain) const {
  if (!descriptor_) return std::accumulate(weights_.begin(), weights_.end(), 0.0);
  double t = 0.0;
  if (descriptor_->lebesgue_scale != 0.0) {
    if (!domain.bounded()) throw DomainError("Lebesgue base measure on an unbounded domain");
    t += descriptor_->lebesgue_scale * to_double(domain.upper.value() - domain.lower.value());
  }
  for (const auto& [x, w] : descriptor_->atoms) {
    if (domain.contains(exact_rational(x))) t += w;
  }
  return t;
}

bool BaseMeasure::purely_atomic() const {
  // Explicit weights describe nu only through its cell masses; a cell of
  // positive length carrying weight is not known to be an atom.
  if (!descriptor_) {
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (weights_[i] > 0.0 && !finest_->cell(i).singleton) return false;
    }
    return true;
  }
  return descriptor_->lebesgue_scale == 0.0;
}

Histogram lebesgue_histogram(const PartitionPtr& p, double scale) {
  return Histogram(p, MeasureDescriptor::lebesgue(scale).on(*p), HistogramKind::kPositive);
}

}  // namespace histolim
