#include "histolim/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "histolim/error.hpp"

namespace histolim {

using boost::multiprecision::cpp_int;

Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw ValidationError("cannot represent non-finite value exactly");
  if (x == 0.0) return Rational(0);
  int exponent = 0;
  const double fraction = std::frexp(x, &exponent);
  const auto mantissa = static_cast<long long>(std::ldexp(fraction, 53));
  exponent -= 53;
  Rational r(mantissa);
  if (exponent > 0) {
    r *= Rational(cpp_int(1) << exponent);
  } else if (exponent < 0) {
    r /= Rational(cpp_int(1) << -exponent);
  }
  return r;
}

double to_double(const Rational& x) { return x.convert_to<double>(); }

std::string rational_to_string(const Rational& x) {
  const cpp_int num = boost::multiprecision::numerator(x);
  const cpp_int den = boost::multiprecision::denominator(x);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

namespace {

cpp_int parse_integer(std::string_view text) {
  if (text.empty()) throw ValidationError("empty number");
  std::size_t start = (text[0] == '-' || text[0] == '+') ? 1 : 0;
  if (start == text.size()) throw ValidationError("malformed number '" + std::string(text) + "'");
  for (std::size_t i = start; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') {
      throw ValidationError("malformed number '" + std::string(text) + "'");
    }
  }
  // Leading zeros would select octal in the cpp_int string constructor.
  std::string_view digits = text.substr(start);
  while (digits.size() > 1 && digits[0] == '0') digits.remove_prefix(1);
  cpp_int value{std::string(digits)};
  return text[0] == '-' ? cpp_int(-value) : value;
}

// Decimal literals such as "-0.25" or "1e-3", converted exactly.
Rational parse_decimal(std::string_view text) {
  std::string_view mantissa = text;
  long exponent = 0;
  if (const auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = text.substr(0, e);
    exponent = static_cast<long>(parse_integer(text.substr(e + 1)).convert_to<long long>());
  }
  bool negative = false;
  if (!mantissa.empty() && (mantissa[0] == '-' || mantissa[0] == '+')) {
    negative = mantissa[0] == '-';
    mantissa.remove_prefix(1);
  }
  std::string digits;
  if (const auto dot = mantissa.find('.'); dot != std::string_view::npos) {
    digits = std::string(mantissa.substr(0, dot)) + std::string(mantissa.substr(dot + 1));
    exponent -= static_cast<long>(mantissa.size() - dot - 1);
  } else {
    digits = std::string(mantissa);
  }
  if (digits.empty()) throw ValidationError("malformed number '" + std::string(text) + "'");
  Rational value(parse_integer(digits));
  const cpp_int scale = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(std::labs(exponent)));
  if (exponent > 0) value *= Rational(scale);
  if (exponent < 0) value /= Rational(scale);
  return negative ? Rational(-value) : value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  text = trim(text);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const cpp_int den = parse_integer(trim(text.substr(slash + 1)));
    if (den == 0) throw ValidationError("zero denominator in '" + std::string(text) + "'");
    return Rational(parse_integer(trim(text.substr(0, slash))), den);
  }
  return parse_decimal(text);
}

// ---------------------------------------------------------------------------
// Endpoint

const Rational& Endpoint::value() const {
  if (!is_finite()) throw DomainError("infinite endpoint has no finite value");
  return value_;
}

double Endpoint::to_double() const {
  switch (kind_) {
    case Kind::kNegInf:
      return -std::numeric_limits<double>::infinity();
    case Kind::kPosInf:
      return std::numeric_limits<double>::infinity();
    case Kind::kFinite:
      break;
  }
  return histolim::to_double(value_);
}

std::string Endpoint::to_string() const {
  switch (kind_) {
    case Kind::kNegInf:
      return "-inf";
    case Kind::kPosInf:
      return "inf";
    case Kind::kFinite:
      break;
  }
  return rational_to_string(value_);
}

Endpoint Endpoint::parse(std::string_view text) {
  text = trim(text);
  if (text == "-inf" || text == "-infinity") return neg_inf();
  if (text == "inf" || text == "+inf" || text == "infinity") return pos_inf();
  return Endpoint(parse_rational(text));
}

bool operator==(const Endpoint& a, const Endpoint& b) {
  if (a.kind_ != b.kind_) return false;
  return !a.is_finite() || a.value_ == b.value_;
}

bool operator<(const Endpoint& a, const Endpoint& b) {
  if (a.kind_ != b.kind_) return static_cast<int>(a.kind_) < static_cast<int>(b.kind_);
  return a.is_finite() && a.value_ < b.value_;
}

// ---------------------------------------------------------------------------
// Domain

Domain Domain::parse(std::string_view text) {
  text = trim(text);
  if (text.size() < 5 || (text.front() != '(' && text.front() != '[') ||
      (text.back() != ')' && text.back() != ']')) {
    throw ValidationError("malformed interval '" + std::string(text) + "'");
  }
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    throw ValidationError("malformed interval '" + std::string(text) + "'");
  }
  Domain d;
  d.lower_closed = text.front() == '[';
  d.upper_closed = text.back() == ']';
  d.lower = Endpoint::parse(text.substr(1, comma - 1));
  d.upper = Endpoint::parse(text.substr(comma + 1, text.size() - comma - 2));
  if (!(d.lower < d.upper)) throw ValidationError("empty interval '" + std::string(text) + "'");
  if ((d.lower_closed && !d.lower.is_finite()) || (d.upper_closed && !d.upper.is_finite())) {
    throw ValidationError("infinite endpoints must be open in '" + std::string(text) + "'");
  }
  return d;
}

std::string Domain::to_string() const {
  return std::string(lower_closed ? "[" : "(") + lower.to_string() + "," + upper.to_string() +
         (upper_closed ? "]" : ")");
}

bool Domain::contains(const Rational& x) const {
  const Endpoint p(x);
  const bool above = lower_closed ? lower <= p : lower < p;
  const bool below = upper_closed ? p <= upper : p < upper;
  return above && below;
}

// ---------------------------------------------------------------------------
// Cell

Cell Cell::interval(Endpoint lower, Endpoint upper, bool upper_closed) {
  return Cell{std::move(lower), std::move(upper), upper_closed && upper.is_finite(), false};
}

Cell Cell::point(Rational x) {
  Endpoint e(std::move(x));
  return Cell{e, e, true, true};
}

bool Cell::contains(const Rational& x) const {
  const Endpoint p(x);
  if (singleton) return p == lower;
  return lower < p && (upper_closed ? p <= upper : p < upper);
}

bool Cell::contains(const Cell& other) const {
  if (other.singleton) return contains(other.lower.value());
  if (singleton) return false;
  if (other.lower < lower) return false;
  if (other.upper < upper) return true;
  return other.upper == upper && (upper_closed || !other.upper_closed);
}

bool Cell::intersects_closed(const Rational& a, const Rational& b) const {
  const Endpoint lo(a);
  const Endpoint hi(b);
  if (singleton) return lo <= lower && lower <= hi;
  return lower < hi && (upper_closed ? lo <= upper : lo < upper);
}

bool Cell::precedes(const Cell& other) const {
  const Endpoint& right = singleton ? lower : upper;
  const bool right_closed = singleton || upper_closed;
  const bool other_left_closed = other.singleton;
  if (right < other.lower) return true;
  return right == other.lower && !(right_closed && other_left_closed);
}

double Cell::length() const {
  if (singleton) return 0.0;
  if (!bounded()) return std::numeric_limits<double>::infinity();
  return histolim::to_double(upper.value() - lower.value());
}

std::optional<Rational> Cell::exact_length() const {
  if (singleton) return Rational(0);
  if (!bounded()) return std::nullopt;
  return Rational(upper.value() - lower.value());
}

std::string Cell::to_string() const {
  if (singleton) return "{" + lower.to_string() + "}";
  return "(" + lower.to_string() + "," + upper.to_string() + (upper_closed ? "]" : ")");
}

// ---------------------------------------------------------------------------
// Partition

Partition::Partition(Domain domain, std::vector<Cell> cells,
                     std::vector<std::optional<CellIndex>> labels)
    : domain_(std::move(domain)), cells_(std::move(cells)), labels_(std::move(labels)) {
  if (cells_.empty()) throw ValidationError("a partition needs at least one cell");
  if (labels_.size() != cells_.size()) throw ValidationError("one label slot per cell required");

  Endpoint frontier = domain_.lower;
  bool frontier_done = !domain_.lower_closed;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    if (c.singleton) {
      if (!c.lower.is_finite() || !(c.upper == c.lower)) {
        throw ValidationError("malformed singleton cell " + c.to_string());
      }
      if (labels_[i]) throw ValidationError("singleton cells carry no tree label");
      if (frontier_done || !(c.lower == frontier)) {
        throw ValidationError("cell " + c.to_string() + " breaks the cover of " + domain_.to_string());
      }
      frontier_done = true;
      continue;
    }
    if (!(c.lower < c.upper)) throw ValidationError("empty cell " + c.to_string());
    if (c.upper_closed && !c.upper.is_finite()) throw ValidationError("closed infinite endpoint");
    if (!frontier_done || !(c.lower == frontier)) {
      throw ValidationError("cell " + c.to_string() + " breaks the cover of " + domain_.to_string());
    }
    frontier = c.upper;
    frontier_done = c.upper_closed;
  }
  if (!(frontier == domain_.upper) || frontier_done != domain_.upper_closed) {
    throw ValidationError("cells do not cover " + domain_.to_string());
  }

  const CellIndex* previous = nullptr;
  for (const auto& l : labels_) {
    if (!l) continue;
    if (previous && !(*previous < *l)) {
      throw ValidationError("cell labels out of lexicographic order at " + l->to_string());
    }
    previous = &*l;
  }
}

std::optional<std::size_t> Partition::find(const CellIndex& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] && *labels_[i] == label) return i;
  }
  return std::nullopt;
}

std::optional<int> Partition::binary_level() const {
  std::vector<CellIndex> tree;
  for (const auto& l : labels_) {
    if (l) tree.push_back(*l);
  }
  if (tree.empty()) return std::nullopt;
  const int m = tree.front().level();
  if (m >= 63 || tree.size() != (std::size_t{1} << m)) return std::nullopt;
  for (std::size_t k = 0; k < tree.size(); ++k) {
    if (tree[k].level() != m || tree[k].bits() != k) return std::nullopt;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Refinement

RefinementMap refine_map(PartitionPtr coarse, PartitionPtr fine) {
  if (!coarse || !fine) throw ValidationError("null partition");
  if (!(coarse->domain() == fine->domain())) {
    throw ValidationError("partitions live on different domains", "not_refinement");
  }
  RefinementMap map{coarse, fine, std::vector<std::vector<std::size_t>>(coarse->size())};
  std::size_t i = 0;
  for (std::size_t j = 0; j < fine->size(); ++j) {
    const Cell& b = fine->cell(j);
    while (i < coarse->size() && coarse->cell(i).precedes(b)) ++i;
    if (i == coarse->size() || !coarse->cell(i).contains(b)) {
      throw ValidationError("fine cell " + b.to_string() + " straddles a coarse boundary",
                            "not_refinement");
    }
    map.groups[i].push_back(j);
  }
  for (std::size_t k = 0; k < map.groups.size(); ++k) {
    if (map.groups[k].empty()) {
      throw ValidationError("coarse cell " + coarse->cell(k).to_string() + " has no fine cells",
                            "not_refinement");
    }
  }
  return map;
}

RefinementMap compose(const RefinementMap& ab, const RefinementMap& bc) {
  if (ab.fine != bc.coarse && !(*ab.fine == *bc.coarse)) {
    throw PartitionMismatch("refinement maps do not chain");
  }
  RefinementMap ac{ab.coarse, bc.fine, {}};
  ac.groups.reserve(ab.groups.size());
  for (const auto& group : ab.groups) {
    std::vector<std::size_t> merged;
    for (std::size_t j : group) {
      merged.insert(merged.end(), bc.groups[j].begin(), bc.groups[j].end());
    }
    ac.groups.push_back(std::move(merged));
  }
  return ac;
}

// ---------------------------------------------------------------------------
// Chains

PartitionChain::PartitionChain(std::vector<PartitionPtr> levels, ChainKind kind)
    : levels_(std::move(levels)), kind_(kind) {
  if (levels_.empty()) throw ValidationError("a chain needs at least one level");
  if (levels_.size() - 1 > static_cast<std::size_t>(CellIndex::kMaxLevel)) {
    throw CapacityError("chain depth exceeds index capacity");
  }
  steps_.reserve(levels_.size() - 1);
  for (std::size_t m = 1; m < levels_.size(); ++m) {
    steps_.push_back(refine_map(levels_[m - 1], levels_[m]));
  }
}

RefinementMap PartitionChain::map(std::size_t coarse_level, std::size_t fine_level) const {
  if (coarse_level > fine_level || fine_level > depth()) {
    throw ValidationError("invalid level pair for refinement map");
  }
  if (coarse_level == fine_level) {
    RefinementMap id{levels_[coarse_level], levels_[coarse_level], {}};
    for (std::size_t i = 0; i < levels_[coarse_level]->size(); ++i) id.groups.push_back({i});
    return id;
  }
  RefinementMap result = steps_[coarse_level];
  for (std::size_t m = coarse_level + 2; m <= fine_level; ++m) {
    result = compose(result, steps_[m - 1]);
  }
  return result;
}

bool PartitionChain::is_binary_tree() const {
  for (std::size_t m = 0; m < levels_.size(); ++m) {
    const auto level = levels_[m]->binary_level();
    if (!level || static_cast<std::size_t>(*level) != m) return false;
  }
  return true;
}

PartitionChain PartitionChain::truncated(std::size_t m) const {
  if (m > depth()) throw ValidationError("truncation depth exceeds chain depth");
  PartitionChain copy = *this;
  copy.levels_.resize(m + 1);
  copy.steps_.resize(m);
  return copy;
}

PartitionChain dyadic_chain(const Domain& domain, int depth, const ChainLimits& limits) {
  if (depth < 0) throw ValidationError("depth must be nonnegative");
  if (depth > limits.max_depth) {
    throw CapacityError("depth " + std::to_string(depth) + " exceeds maximum chain depth " +
                        std::to_string(limits.max_depth));
  }
  if (!domain.bounded() || !domain.upper_closed) {
    throw ValidationError("dyadic chains need a finite domain of the form (a,b] or [a,b]");
  }
  const Rational a = domain.lower.value();
  const Rational width = domain.upper.value() - a;
  std::vector<PartitionPtr> levels;
  for (int m = 0; m <= depth; ++m) {
    const std::uint64_t count = std::uint64_t{1} << m;
    const Rational h = width / Rational(cpp_int(count));
    std::vector<Cell> cells;
    std::vector<std::optional<CellIndex>> labels;
    cells.reserve(count + 1);
    labels.reserve(count + 1);
    if (domain.lower_closed) {
      cells.push_back(Cell::point(a));
      labels.emplace_back(std::nullopt);
    }
    Rational left = a;
    for (std::uint64_t k = 0; k < count; ++k) {
      Rational right = (k + 1 == count) ? domain.upper.value() : Rational(a + h * Rational(cpp_int(k + 1)));
      cells.push_back(Cell::interval(left, right));
      labels.emplace_back(CellIndex::from_bits(k, m));
      left = std::move(right);
    }
    levels.push_back(std::make_shared<const Partition>(domain, std::move(cells), std::move(labels)));
  }
  return PartitionChain(std::move(levels), ChainKind::kDyadic);
}

namespace {

[[noreturn]] void triangular_error(std::size_t n, std::size_t m, const std::string& what) {
  throw ValidationError("triangular array violates " + what + " at (n,m) = (" + std::to_string(n) +
                        "," + std::to_string(m) + ")");
}

PartitionPtr line_partition(const std::vector<double>& points) {
  Domain line{Endpoint::neg_inf(), Endpoint::pos_inf(), false, false};
  const std::size_t count = points.size() + 1;
  const bool labelled = (count & (count - 1)) == 0;
  int bits = 0;
  while ((std::size_t{1} << bits) < count) ++bits;

  std::vector<Cell> cells;
  std::vector<std::optional<CellIndex>> labels;
  Endpoint left = Endpoint::neg_inf();
  for (std::size_t k = 0; k < count; ++k) {
    Endpoint right = k < points.size() ? Endpoint(exact_rational(points[k])) : Endpoint::pos_inf();
    if (left == right) continue;  // coincident outer points
    cells.push_back(Cell::interval(left, right, right.is_finite()));
    labels.push_back(labelled ? std::optional<CellIndex>(CellIndex::from_bits(k, bits)) : std::nullopt);
    left = std::move(right);
  }
  return std::make_shared<const Partition>(line, std::move(cells), std::move(labels));
}

}  // namespace

PartitionChain triangular_chain(const std::vector<std::vector<double>>& levels, const ChainLimits& limits) {
  if (levels.empty()) throw ValidationError("triangular array needs at least one level");
  if (static_cast<int>(levels.size()) > limits.max_depth) {
    throw CapacityError("array depth " + std::to_string(levels.size()) + " exceeds maximum chain depth " +
                        std::to_string(limits.max_depth));
  }
  for (std::size_t n = 0; n < levels.size(); ++n) {
    for (std::size_t m = 0; m < levels[n].size(); ++m) {
      if (!std::isfinite(levels[n][m])) triangular_error(n + 1, m + 1, "finiteness");
    }
  }
  const auto& first = levels.front();
  if (first.empty()) triangular_error(1, 1, "nonempty first level");
  for (std::size_t m = 1; m < first.size(); ++m) {
    if (!(first[m - 1] < first[m])) triangular_error(1, m + 1, "strict ordering");
  }
  for (std::size_t n = 1; n < levels.size(); ++n) {
    const auto& prev = levels[n - 1];
    const auto& cur = levels[n];
    const std::size_t big_m = prev.size();
    if (cur.size() != 2 * big_m + 1) triangular_error(n + 1, cur.size(), "level size 2M+1");
    // 1-based: q_{n+1,2m} = q_{n,m}; new points sit at odd positions.
    for (std::size_t pos = 1; pos <= cur.size(); ++pos) {
      const double q = cur[pos - 1];
      if (pos % 2 == 0) {
        if (q != prev[pos / 2 - 1]) triangular_error(n + 1, pos, "nesting q(n+1,2m) = q(n,m)");
        continue;
      }
      const std::size_t m = (pos + 1) / 2;
      if (m == 1) {
        if (!(q <= prev.front())) triangular_error(n + 1, pos, "outer ordering");
      } else if (m == big_m + 1) {
        if (!(q >= prev.back())) triangular_error(n + 1, pos, "outer ordering");
      } else if (!(prev[m - 2] < q && q < prev[m - 1])) {
        triangular_error(n + 1, pos, "interleaving");
      }
    }
  }
  std::vector<PartitionPtr> parts;
  parts.push_back(line_partition({}));
  for (const auto& level : levels) parts.push_back(line_partition(level));
  return PartitionChain(std::move(parts), ChainKind::kTriangular);
}

std::vector<std::vector<double>> expanding_triangular_array(int depth) {
  std::vector<std::vector<double>> levels;
  if (depth < 1) return levels;
  levels.push_back({0.0});
  for (int n = 2; n <= depth; ++n) {
    const auto& prev = levels.back();
    std::vector<double> next;
    next.reserve(2 * prev.size() + 1);
    next.push_back(prev.front() - 1.0);
    for (std::size_t m = 0; m < prev.size(); ++m) {
      next.push_back(prev[m]);
      if (m + 1 < prev.size()) next.push_back(0.5 * (prev[m] + prev[m + 1]));
    }
    next.push_back(prev.back() + 1.0);
    levels.push_back(std::move(next));
  }
  return levels;
}

Rational cantor_midpoint(const CellIndex& e) {
  // x = (2 N + 1) / (2 * 3^L) with N = sum_l 2 d_l 3^{L-l}.
  cpp_int n = 0;
  cpp_int den = 1;
  for (int l = 1; l <= e.level(); ++l) {
    n = 3 * n + 2 * e.digit(l);
    den *= 3;
  }
  return Rational(2 * n + 1, 2 * den);
}

std::size_t cell_of(const Partition& p, const Rational& x) {
  const Endpoint point(x);
  const auto& cells = p.cells();
  const auto it = std::partition_point(cells.begin(), cells.end(), [&](const Cell& c) {
    if (c.singleton) return c.lower < point;
    return c.upper < point || (c.upper == point && !c.upper_closed);
  });
  if (it == cells.end() || !it->contains(x)) {
    throw DomainError("point " + rational_to_string(x) + " outside domain " + p.domain().to_string());
  }
  return static_cast<std::size_t>(it - cells.begin());
}

std::size_t cell_of(const Partition& p, double x) {
  if (!std::isfinite(x)) throw DomainError("point is not finite");
  return cell_of(p, exact_rational(x));
}

}  // namespace histolim
