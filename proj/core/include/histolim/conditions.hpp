#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "histolim/partition.hpp"
#include "histolim/systems.hpp"

namespace histolim {

enum class VerdictStatus { kHolds, kFails, kSufficientConditionFails, kUndetermined };

const char* to_string(VerdictStatus status);

using Series = std::vector<std::pair<int, double>>;

struct Extrapolation {
  std::string method;
  double value = 0.0;
};

/// Finite-depth outcome of a condition evaluator. Terminal statuses always
/// carry the tag of the exact argument behind them in `argument`.
struct Verdict {
  std::string condition;
  std::string anchor;
  VerdictStatus status = VerdictStatus::kUndetermined;
  std::string argument;
  Series evidence;
  std::optional<Extrapolation> extrapolation;
  std::map<std::string, Series> auxiliary;
  std::string note;
};

inline constexpr int kProductDepth = 40;
inline constexpr int kMatrixDepth = 16;

/// A ratio bound below 0.9 holding over the last 10 consecutive terms.
std::optional<double> certify_geometric_tail(const std::vector<double>& terms);

/// S_M = sum_{m<M} log(1 + beta_{e o_m 1} / beta_{e o_m 0}).
Verdict polya_tight_condition(const PolyaTreeSystem& sys, const CellIndex& prefix, int depth = kProductDepth);
/// The tight condition for every prefix; the first failing prefix decides.
Verdict polya_tight_all_prefixes(const PolyaTreeSystem& sys, int depth = kProductDepth);
/// Same sum along i_m with the roles of the children swapped.
Verdict polya_leakage_condition(const PolyaTreeSystem& sys, int depth = kProductDepth);
Verdict polya_weak_condition(const PolyaTreeSystem& sys, int depth = kProductDepth);
/// Exact level sums sum_{e in E_m} prod_l E[V^2]/E[V], m = 1..depth.
std::vector<double> polya_weak_level_sums(const PolyaTreeSystem& sys, int depth);

/// Diagonal-vague (diagonal specs only), spectral |alpha| tau_max, weak
/// sum sqrt(Sigma_ii) and trace (no verdict), evaluated on chain levels.
std::vector<Verdict> gaussian_conditions(const GaussianSystem& sys, const PartitionChain& chain,
                                         int depth = kMatrixDepth);

/// The tight condition, which holds for every valid base measure.
Verdict dirichlet_condition(const DirichletSystem& sys, const Domain& domain);
Verdict dirichlet_weak_condition(const DirichletSystem& sys, const Domain& domain);

struct LeakageRow {
  int depth = 0;
  double compact = 0.0;  // K of the candidate compact [-K, K]
  double outside_mass = 0.0;
  bool escaped = false;  // both outer cells are disjoint from [-K, K]
};

struct BoundaryRow {
  int depth = 0;
  double radius = 0.0;
  double boundary_mass = 0.0;  // mass of cells inside [0, r) or (1 - r, 1]
};

struct LeakageReport {
  double delta = 0.0;
  std::vector<LeakageRow> rows;
  /// Per depth, the row of the largest candidate compact already escaped.
  std::vector<LeakageRow> summary;
  std::vector<BoundaryRow> boundary_rows;
  Verdict verdict;
};

/// Candidate compacts K = 2^k for k = -1 .. depth unless given.
LeakageReport leakage_counterexample(double delta, int depth, std::vector<double> compacts = {});
Verdict leakage_tight_condition(const LeakageSystem& sys, int depth);

}  // namespace histolim
