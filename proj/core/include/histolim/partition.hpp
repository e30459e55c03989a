#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "histolim/cell_index.hpp"

namespace histolim {

using Rational = boost::multiprecision::cpp_rational;

/// Exact conversion: every finite double is a dyadic rational.
Rational exact_rational(double x);
double to_double(const Rational& x);
/// "3/4", "-1", "0".
std::string rational_to_string(const Rational& x);
Rational parse_rational(std::string_view text);

/// A point of the extended real line.
class Endpoint {
 public:
  enum class Kind { kNegInf, kFinite, kPosInf };

  Endpoint(Rational value) : kind_(Kind::kFinite), value_(std::move(value)) {}  // NOLINT
  static Endpoint neg_inf() { return Endpoint(Kind::kNegInf); }
  static Endpoint pos_inf() { return Endpoint(Kind::kPosInf); }
  static Endpoint parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  bool is_finite() const noexcept { return kind_ == Kind::kFinite; }
  const Rational& value() const;
  double to_double() const;
  std::string to_string() const;

  friend bool operator==(const Endpoint& a, const Endpoint& b);
  friend bool operator<(const Endpoint& a, const Endpoint& b);
  friend bool operator<=(const Endpoint& a, const Endpoint& b) { return !(b < a); }
  friend bool operator>(const Endpoint& a, const Endpoint& b) { return b < a; }

 private:
  explicit Endpoint(Kind kind) : kind_(kind) {}
  Kind kind_;
  Rational value_;
};

/// An interval of the real line with either closedness at each end.
struct Domain {
  Endpoint lower = Rational(0);
  Endpoint upper = Rational(1);
  bool lower_closed = false;
  bool upper_closed = true;

  /// Parses "(0,1]", "[0,1]", "(-inf,inf)", "(-1/2,3]".
  static Domain parse(std::string_view text);
  std::string to_string() const;
  bool contains(const Rational& x) const;
  bool bounded() const { return lower.is_finite() && upper.is_finite(); }

  friend bool operator==(const Domain&, const Domain&) = default;
};

/// A partition cell: either a half-open interval (lower, upper] (upper end
/// optionally open, as for (s, infinity) or (s, 1)) or a singleton {lower}.
struct Cell {
  Endpoint lower;
  Endpoint upper;
  bool upper_closed = true;
  bool singleton = false;

  static Cell interval(Endpoint lower, Endpoint upper, bool upper_closed = true);
  static Cell point(Rational x);

  bool contains(const Rational& x) const;
  bool contains(const Cell& other) const;
  bool intersects_closed(const Rational& a, const Rational& b) const;
  /// True when this cell lies strictly to the left of `other`.
  bool precedes(const Cell& other) const;
  /// Lebesgue measure; +infinity for unbounded cells, 0 for singletons.
  double length() const;
  std::optional<Rational> exact_length() const;
  bool bounded() const { return lower.is_finite() && upper.is_finite(); }
  std::string to_string() const;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// An ordered finite partition of a Domain into disjoint nonempty cells.
/// Interval cells carry a dyadic-tree label; singleton cells are unlabeled.
class Partition {
 public:
  Partition(Domain domain, std::vector<Cell> cells, std::vector<std::optional<CellIndex>> labels);

  const Domain& domain() const noexcept { return domain_; }
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const Cell& cell(std::size_t i) const { return cells_.at(i); }
  const std::optional<CellIndex>& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::optional<CellIndex>>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return cells_.size(); }

  /// Position of the cell carrying `label`, if any.
  std::optional<std::size_t> find(const CellIndex& label) const;
  /// True when the labeled cells are exactly the 2^m sequences of length m,
  /// in order, for some m; returns that m.
  std::optional<int> binary_level() const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.domain_ == b.domain_ && a.cells_ == b.cells_ && a.labels_ == b.labels_;
  }

 private:
  Domain domain_;
  std::vector<Cell> cells_;
  std::vector<std::optional<CellIndex>> labels_;
};

using PartitionPtr = std::shared_ptr<const Partition>;

/// groups[i] lists the fine cells whose union is coarse cell i.
struct RefinementMap {
  PartitionPtr coarse;
  PartitionPtr fine;
  std::vector<std::vector<std::size_t>> groups;
};

/// Builds the refinement map, throwing ValidationError("not_refinement")
/// naming the first fine cell that straddles a coarse boundary.
RefinementMap refine_map(PartitionPtr coarse, PartitionPtr fine);
/// J_ac(i) = union over j in J_ab(i) of J_bc(j).
RefinementMap compose(const RefinementMap& ab, const RefinementMap& bc);

enum class ChainKind { kDyadic, kTriangular, kCustom };

struct ChainLimits {
  int max_depth = 30;
};

/// Refining partitions alpha_0 <= alpha_1 <= ... with consecutive maps.
class PartitionChain {
 public:
  PartitionChain(std::vector<PartitionPtr> levels, ChainKind kind);

  std::size_t depth() const noexcept { return levels_.size() - 1; }
  const PartitionPtr& level(std::size_t m) const { return levels_.at(m); }
  const std::vector<PartitionPtr>& levels() const noexcept { return levels_; }
  /// Map from level m-1 to level m.
  const RefinementMap& step(std::size_t m) const { return steps_.at(m - 1); }
  RefinementMap map(std::size_t coarse_level, std::size_t fine_level) const;
  ChainKind kind() const noexcept { return kind_; }
  /// Level m carries the labels E_m (plus optional singletons) for every m.
  bool is_binary_tree() const;
  /// Chain truncated to levels 0..m.
  PartitionChain truncated(std::size_t m) const;

 private:
  std::vector<PartitionPtr> levels_;
  std::vector<RefinementMap> steps_;
  ChainKind kind_;
};

/// Bisects every interval at its midpoint. Supported domains: finite (a,b]
/// and [a,b]; the latter receives a leading singleton {a} at every level.
PartitionChain dyadic_chain(const Domain& domain, int depth, const ChainLimits& limits = {});

/// Partitions of the real line cut at the points of a triangular array.
/// levels[k] holds the cut points of chain level k+1; each level has
/// 2*M+1 points when the previous one has M. The outermost new points may
/// coincide with the previous extremes, in which case the empty cell is
/// dropped. Throws ValidationError naming the first offending (n, m).
PartitionChain triangular_chain(const std::vector<std::vector<double>>& levels,
                                const ChainLimits& limits = {});

/// The triangular array with q_1 = {0}, outer points moving out by one per
/// level and interior midpoints: q_2 = {-1,0,1}, q_3 = {-2,-1,-1/2,0,1/2,1,2}, ...
std::vector<std::vector<double>> expanding_triangular_array(int depth);

/// Midpoint of the interval deleted at step |e| of the middle-thirds
/// construction: x() = 1/2, x(0) = 1/6, x(1) = 5/6, ...
Rational cantor_midpoint(const CellIndex& e);

/// Position of the cell containing x; DomainError outside the domain.
std::size_t cell_of(const Partition& p, const Rational& x);
std::size_t cell_of(const Partition& p, double x);

}  // namespace histolim
