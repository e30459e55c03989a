#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "histolim/covariance.hpp"
#include "histolim/histogram.hpp"
#include "histolim/random_stream.hpp"
#include "histolim/systems.hpp"

namespace histolim {

// Dirichlet
Histogram sample_dirichlet(const DirichletSystem& sys, const PartitionPtr& p, RandomStream& s);
Histogram dirichlet_mean(const DirichletSystem& sys, const PartitionPtr& p);

// Polya trees. The chain must carry binary-tree labels up to level m.
Histogram sample_polya(const PolyaTreeSystem& sys, const PartitionChain& chain, std::size_t m,
                       RandomStream& s);
/// Product over l of E V_{e_1..e_l}; the mass p0 of a singleton is not included.
double polya_mean(const PolyaTreeSystem& sys, const CellIndex& e);
double polya_second_moment(const PolyaTreeSystem& sys, const CellIndex& e);
/// Mean measure on level m of the chain, including p0.
Histogram polya_mean_histogram(const PolyaTreeSystem& sys, const PartitionChain& chain, std::size_t m);

// Gaussian
Histogram sample_gaussian(const GaussianSystem& sys, const PartitionPtr& p, RandomStream& s);
/// sqrt(2 Sigma_ii / pi), the mean of |Phi(A_i)| for centred systems.
Histogram gaussian_q_alpha(const GaussianSystem& sys, const PartitionPtr& p);

// Leakage counterexample
/// Triangular array with q_1 = {0}, outer points doubling (-1, 1, then
/// -2, 2, -4, 4, ...) and interior midpoints.
std::vector<std::vector<double>> leakage_array(int depth);
PartitionChain leakage_chain(int depth, bool boundary, const ChainLimits& limits = {});
Histogram leakage_histogram(const LeakageSystem& sys, const PartitionPtr& p);

/// A sampler prepared for one level of a chain; reusable across draws.
class LevelSampler {
 public:
  LevelSampler(const HistogramSystem& sys, const PartitionChain& chain, std::size_t m);

  Histogram draw(RandomStream& s) const;
  const PartitionPtr& partition() const noexcept { return partition_; }
  std::size_t level() const noexcept { return level_; }

 private:
  HistogramSystem sys_;
  PartitionPtr partition_;
  std::size_t level_;
  std::vector<double> nu_;                     // Dirichlet parameters
  std::vector<std::vector<BetaPair>> pairs_;   // Polya pairs per parent level
  std::vector<std::size_t> tree_cells_;        // Polya: position of leaf k
  std::ptrdiff_t singleton_ = -1;
  std::shared_ptr<const Covariance> covariance_;
  std::vector<double> centre_;
  std::vector<double> fixed_;                  // deterministic systems
};

/// Samples level m once and projects to every coarser level (index = level).
std::vector<Histogram> chain_sample(const HistogramSystem& sys, const PartitionChain& chain, std::size_t m,
                                    RandomStream& s);

/// Reference measure per level: the mean measure of probability families,
/// gaussian_q_alpha for centred Gaussian systems.
Histogram reference_histogram(const HistogramSystem& sys, const PartitionChain& chain, std::size_t m);

struct PathPoint {
  double t;
  double value;
};

/// Cumulative sums at right endpoints; with `origin` the point (left end, 0)
/// is prepended.
std::vector<PathPoint> path_from_histogram(const Histogram& h, bool origin = false);

}  // namespace histolim
