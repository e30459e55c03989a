#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "histolim/conditions.hpp"
#include "histolim/density.hpp"
#include "histolim/samplers.hpp"

namespace histolim {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads (0 = all cores).
/// The first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

int default_jobs();

struct MonteCarloConfig {
  std::uint64_t seed = 0;
  std::size_t replicates = 10000;
  int jobs = 0;
};

// ---------------------------------------------------------------- coherence

struct CoherenceResult {
  bool pass = false;
  std::uint64_t seed = 0;
  std::size_t coarse_level = 0;
  std::size_t replicates = 0;
  std::vector<double> z_first;   // per coarse cell
  std::vector<double> z_second;  // per pair i <= j, row-major upper triangle
  double max_abs_z = 0.0;
};

inline constexpr double kCoherenceThreshold = 4.0;
inline constexpr std::size_t kMinReplicates = 1000;

/// Compares first and second cell moments of project(level m samples) with
/// direct level m-1 samples drawn on an independent stream. `coarse_oracle`
/// replaces the system on the direct side (fault injection).
CoherenceResult coherence_test(const HistogramSystem& sys, const PartitionChain& chain, std::size_t m,
                               const MonteCarloConfig& config,
                               const std::optional<HistogramSystem>& coarse_oracle = std::nullopt);

struct CoherenceMajority {
  bool pass = false;
  std::vector<CoherenceResult> runs;
};

/// Three seeds (seed, seed+1, seed+2), majority verdict.
CoherenceMajority coherence_majority(const HistogramSystem& sys, const PartitionChain& chain, std::size_t m,
                                     const MonteCarloConfig& config,
                                     const std::optional<HistogramSystem>& coarse_oracle = std::nullopt);

// ---------------------------------------------------------------- curves

struct CurvePoint {
  int depth = 0;
  double L = 0.0;  // unused by the atomicity curve
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
  double tail = 0.0;  // P(statistic > delta), domination curve only
};

enum class AtomicityTrend { kDecreasing, kPlateau, kIndeterminate };

const char* to_string(AtomicityTrend t);

/// max |P(A)| / sum |P(A)| per sample; for probability histograms this is the
/// largest cell mass.
double max_cell_share(const Histogram& h);

std::vector<CurvePoint> atomicity_statistic(const HistogramSystem& sys, const PartitionChain& chain,
                                            const std::vector<int>& depths, const MonteCarloConfig& config);

/// Decreasing when last + 4 se < first / 4; plateau when last - 4 se > first / 2.
AtomicityTrend atomicity_trend(const std::vector<CurvePoint>& curve);

/// E[||P - P ^ L Q||] and P(statistic > delta) on a (depth, L) grid. The
/// reference is reference_histogram; signed samples enter through |P|.
struct DominationResult {
  std::vector<CurvePoint> curve;
  /// Depths where Q has a zero cell that some sample charges.
  std::vector<int> uncovered_depths;
};

DominationResult domination_statistic(const HistogramSystem& sys, const PartitionChain& chain,
                                      const std::vector<int>& depths, const std::vector<double>& L_grid,
                                      double delta, const MonteCarloConfig& config);

/// TV distance between p and its histogram density at levels 1..depth of
/// the chain, against Lebesgue measure on the (bounded) domain.
std::vector<double> tv_martingale_curve(const Density& p, const PartitionChain& chain, int depth);

double quadratic_variation(const std::vector<PathPoint>& path);

// ---------------------------------------------------------------- phases

enum class Phase { kAbsolutelyContinuous, kFixedAtomic, kContinuousSingular, kRandomAtomic, kInconclusive };

const char* to_string(Phase p);

struct PhaseConfig {
  MonteCarloConfig mc;
  std::vector<int> depths;  // empty: 2..min(10, chain depth)
  std::vector<double> L_grid{1.0, 2.0, 5.0, 10.0, 20.0};
  double delta = 0.1;
  bool monte_carlo = true;
};

struct PhaseReport {
  std::string family;
  bool completely_random = false;
  std::vector<Verdict> verdicts;
  std::vector<CurvePoint> atomicity_curve;
  std::optional<AtomicityTrend> atomicity_trend;
  DominationResult domination;
  Phase declared_phase = Phase::kInconclusive;
  bool random_atomic = false;
  std::string anchor;
  std::string rationale;
};

PhaseReport phase_report(const HistogramSystem& sys, const PartitionChain& chain, const PhaseConfig& config);

}  // namespace histolim
