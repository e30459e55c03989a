#include "histolim/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "histolim/covariance.hpp"
#include "histolim/error.hpp"
#include "histolim/samplers.hpp"

namespace histolim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kEnumerationCap = 20;
constexpr Eigen::Index kNumericSpectrumCap = 1024;

double share(const BetaPair& p, int digit) {
  const auto [a, b] = p;
  if (std::isinf(a) && std::isinf(b)) return 0.5;
  if (std::isinf(a)) return digit == 0 ? 1.0 : 0.0;
  if (std::isinf(b)) return digit == 0 ? 0.0 : 1.0;
  return (digit == 0 ? a : b) / (a + b);
}

double share_square(const BetaPair& p, int digit) {
  const auto [a, b] = p;
  if (std::isinf(a) && std::isinf(b)) return 0.25;
  if (std::isinf(a)) return digit == 0 ? 1.0 : 0.0;
  if (std::isinf(b)) return digit == 0 ? 0.0 : 1.0;
  const double x = digit == 0 ? a : b;
  return x * (x + 1.0) / ((a + b) * (a + b + 1.0));
}

// E[V^2] / E[V] for one child; cells of mean zero drop out.
double second_over_first(const BetaPair& p, int digit) {
  const double m = share(p, digit);
  return m > 0.0 ? share_square(p, digit) / m : 0.0;
}

int table_horizon(const TableRule& t) {
  int horizon = -1;
  for (const auto& [node, pair] : t.nodes) horizon = std::max(horizon, node.level());
  for (const auto& [level, pair] : t.levels) horizon = std::max(horizon, level);
  return horizon;
}

bool has_one(const CellIndex& e) { return e.bits() != 0; }

Verdict make(const std::string& condition, const std::string& anchor) {
  Verdict v;
  v.condition = condition;
  v.anchor = anchor;
  return v;
}

void terminal(Verdict& v, VerdictStatus status, const std::string& argument) {
  v.status = status;
  v.argument = argument;
}

// Partial sums of -log(share) along prefix + digit^m for m < depth.
struct PathSums {
  std::vector<double> terms;
  Series partial;
  bool zero_factor = false;
};

PathSums path_sums(const BetaRule& rule, const CellIndex& prefix, int digit, int depth) {
  if (prefix.level() + depth - 1 > CellIndex::kMaxLevel) {
    throw CapacityError("evaluation depth exceeds the index capacity");
  }
  PathSums out;
  double s = 0.0;
  CellIndex node = prefix;
  for (int m = 0; m < depth; ++m) {
    const double f = share(beta_pair(rule, node), digit);
    const double t = f > 0.0 ? -std::log(f) : kInf;
    if (std::isinf(t)) out.zero_factor = true;
    out.terms.push_back(t);
    s += t;
    out.partial.emplace_back(m + 1, s);
    if (m + 1 < depth) node = node.child(digit);
  }
  return out;
}

Verdict path_condition(const PolyaTreeSystem& sys, const CellIndex& prefix, int digit, int depth,
                       const std::string& name) {
  if (depth < 1) throw ValidationError("evaluation depth must be positive");
  Verdict v = make(name, "P-tight");
  const PathSums sums = path_sums(sys.rule, prefix, digit, depth);
  v.evidence = sums.partial;
  if (sums.zero_factor) {
    terminal(v, VerdictStatus::kHolds, "zero_factor_in_product");
    return v;
  }
  std::visit(
      [&](const auto& rule) {
        using R = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<R, HomogeneousRule>) {
          terminal(v, VerdictStatus::kHolds, "equal_children_factor_one_half");
        } else if constexpr (std::is_same_v<R, DirichletRelationRule>) {
          // The product telescopes to nu(A_{e x^m}) / nu(A_e), the measure of a
          // decreasing sequence of cells.
          if (digit == 0) {
            terminal(v, VerdictStatus::kHolds, "telescoping_measure_of_shrinking_cells");
            return;
          }
          bool right_atom = false;
          for (const auto& [x, w] : rule.measure.atoms) {
            if (w > 0.0 && rule.domain.upper.is_finite() && exact_rational(x) == rule.domain.upper.value()) {
              right_atom = true;
            }
          }
          if (right_atom) {
            terminal(v, VerdictStatus::kFails, "atom_at_right_endpoint");
          } else {
            terminal(v, VerdictStatus::kHolds, "telescoping_measure_of_shrinking_cells");
          }
        } else if constexpr (std::is_same_v<R, CantorTrigRule>) {
          // Terms are log(1 + tan(pi/2 y_m)) <= tan(pi/2 y_m), where y_m is the
          // Cantor midpoint of the all-zero path (x for o_m, 1 - x for i_m).
          const bool escapes = digit == 0 ? has_one(prefix) : (prefix.bits() != ((std::uint64_t{1} << prefix.level()) - 1));
          std::vector<double> bound;
          CellIndex node = prefix;
          for (int m = 0; m < depth; ++m) {
            const double x = to_double(cantor_midpoint(node));
            const double y = digit == 0 ? x : 1.0 - x;
            bound.push_back(std::tan(0.5 * std::numbers::pi * y));
            if (m + 1 < depth) node = node.child(digit);
          }
          v.auxiliary["dominating_term"] = {};
          for (std::size_t m = 0; m < bound.size(); ++m) {
            v.auxiliary["dominating_term"].emplace_back(static_cast<int>(m), bound[m]);
          }
          if (escapes) {
            terminal(v, VerdictStatus::kHolds, "cantor_terms_bounded_below");
            return;
          }
          // y_{m+1} = y_m / 3, so tan(3 theta) = (3t - t^3) / (1 - 3t^2) gives
          // u_{m+1} / u_m = (1 - 3t^2) / (3 - t^2) with t = u_{m+1}, free of
          // the cancellation in the direct quotient.
          Series ratios;
          for (std::size_t m = 1; m < bound.size(); ++m) {
            const double t = bound[m];
            ratios.emplace_back(static_cast<int>(m), (1.0 - 3.0 * t * t) / (3.0 - t * t));
          }
          v.auxiliary["dominating_term_ratio"] = std::move(ratios);
          const auto certified = certify_geometric_tail(bound);
          if (certified) v.note = "certified tail ratio " + std::to_string(*certified);
          // Tail after the last evaluated term is at most u_{M-1} (1/3)/(1 - 1/3).
          v.extrapolation = Extrapolation{"geometric_tail_upper_bound",
                                          v.evidence.back().second + 0.5 * bound.back()};
          terminal(v, VerdictStatus::kFails, "tan_convexity_ratio_one_third");
        } else if constexpr (std::is_same_v<R, TableRule>) {
          const double tail = share(rule.fallback, digit);
          const double t = tail > 0.0 ? -std::log(tail) : kInf;
          v.auxiliary["eventual_term"] = {{table_horizon(rule) + 1, t}};
          if (t > 0.0) {
            terminal(v, VerdictStatus::kHolds, "eventually_constant_positive_terms");
          } else {
            terminal(v, VerdictStatus::kFails, "eventually_zero_terms");
          }
        }
      },
      sys.rule);
  return v;
}

}  // namespace

const char* to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::kHolds:
      return "holds";
    case VerdictStatus::kFails:
      return "fails";
    case VerdictStatus::kSufficientConditionFails:
      return "sufficient_condition_fails";
    case VerdictStatus::kUndetermined:
      break;
  }
  return "undetermined";
}

std::optional<double> certify_geometric_tail(const std::vector<double>& terms) {
  constexpr std::size_t kRun = 10;
  constexpr double kThreshold = 0.9;
  if (terms.size() < kRun + 1) return std::nullopt;
  double worst = 0.0;
  for (std::size_t m = terms.size() - kRun; m < terms.size(); ++m) {
    if (!(terms[m - 1] > 0.0) || !std::isfinite(terms[m - 1])) return std::nullopt;
    worst = std::max(worst, terms[m] / terms[m - 1]);
  }
  if (worst < kThreshold) return worst;
  return std::nullopt;
}

Verdict polya_tight_condition(const PolyaTreeSystem& sys, const CellIndex& prefix, int depth) {
  Verdict v = path_condition(sys, prefix, 0, depth, "polya_tight");
  v.note = (v.note.empty() ? "" : v.note + "; ") + "prefix '" + prefix.to_string() + "'";
  return v;
}

Verdict polya_tight_all_prefixes(const PolyaTreeSystem& sys, int depth) {
  if (const auto* t = std::get_if<TableRule>(&sys.rule)) {
    const int horizon = table_horizon(*t) + 1;
    if (horizon > kEnumerationCap) {
      Verdict v = polya_tight_condition(sys, CellIndex(), depth);
      v.status = VerdictStatus::kUndetermined;
      v.argument.clear();
      v.note = "table too deep to enumerate every prefix";
      return v;
    }
    Verdict first = polya_tight_condition(sys, CellIndex(), depth);
    for (int l = 0; l <= horizon; ++l) {
      for (std::uint64_t k = 0; k < (std::uint64_t{1} << l); ++k) {
        Verdict v = polya_tight_condition(sys, CellIndex::from_bits(k, l), depth);
        if (v.status != VerdictStatus::kHolds) return v;
      }
    }
    first.note += "; every prefix up to level " + std::to_string(horizon) + " checked";
    return first;
  }
  // Homogeneous and Dirichlet-relation arguments hold for every prefix; the
  // Cantor rule already fails at the root.
  return polya_tight_condition(sys, CellIndex(), depth);
}

Verdict polya_leakage_condition(const PolyaTreeSystem& sys, int depth) {
  Verdict v = path_condition(sys, CellIndex(), 1, depth, "polya_leakage");
  if (std::holds_alternative<CantorTrigRule>(sys.rule)) {
    const PathSums o = path_sums(sys.rule, CellIndex(), 0, depth);
    v.auxiliary["o_path_partial_sum"] = o.partial;
    v.argument = "cantor_midpoint_symmetry";
  }
  return v;
}

std::vector<double> polya_weak_level_sums(const PolyaTreeSystem& sys, int depth) {
  std::vector<double> sums;
  if (const auto* h = std::get_if<HomogeneousRule>(&sys.rule)) {
    double w = 1.0;
    for (int m = 1; m <= depth; ++m) {
      const BetaPair p{h->expr(m), h->expr(m)};
      w *= second_over_first(p, 0) + second_over_first(p, 1);
      sums.push_back(w);
    }
    return sums;
  }
  if (const auto* d = std::get_if<DirichletRelationRule>(&sys.rule)) {
    // w(e) = (nu(A_e) + 1) / (nu(X) + 1) by telescoping.
    const Cell whole = Cell::interval(d->domain.lower, d->domain.upper);
    const double total = d->measure.of(whole);
    for (int m = 1; m <= depth; ++m) sums.push_back((total + std::ldexp(1.0, m)) / (total + 1.0));
    return sums;
  }
  std::vector<double> w{1.0};
  for (int m = 1; m <= std::min(depth, kEnumerationCap); ++m) {
    std::vector<double> next(w.size() * 2);
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const BetaPair p = beta_pair(sys.rule, CellIndex::from_bits(k, m - 1));
      next[2 * k] = w[k] * second_over_first(p, 0);
      next[2 * k + 1] = w[k] * second_over_first(p, 1);
      s += next[2 * k] + next[2 * k + 1];
    }
    w = std::move(next);
    sums.push_back(s);
  }
  return sums;
}

Verdict polya_weak_condition(const PolyaTreeSystem& sys, int depth) {
  if (depth < 1) throw ValidationError("evaluation depth must be positive");
  Verdict v = make("polya_weak", "P-weak");
  const auto level_sums = polya_weak_level_sums(sys, depth);
  Series exact;
  for (std::size_t m = 0; m < level_sums.size(); ++m) exact.emplace_back(static_cast<int>(m + 1), level_sums[m]);

  if (const auto* h = std::get_if<HomogeneousRule>(&sys.rule)) {
    bool all_infinite = true;
    for (int m = 1; m <= depth; ++m) {
      const double b = h->expr(m);
      if (!(b > 0.0)) throw ValidationError("homogeneous beta must be positive at level " + std::to_string(m));
      all_infinite = all_infinite && std::isinf(b);
      const double closed = std::isinf(b) ? 1.0 : std::pow(1.0 / (2.0 * b + 1.0) + 1.0, m);
      v.evidence.emplace_back(m, closed);
    }
    v.auxiliary["exact_level_sum"] = std::move(exact);
    const double degree = h->expr.growth_degree();
    v.auxiliary["growth_degree"] = {{0, degree}};
    if (all_infinite && degree == 0.0) {
      terminal(v, VerdictStatus::kHolds, "infinite_beta_closed_form_one");
    } else if (degree >= 1.0) {
      terminal(v, VerdictStatus::kHolds, "closed_form_bounded_beta_grows_like_m");
    } else {
      terminal(v, VerdictStatus::kSufficientConditionFails, "closed_form_diverges_beta_sublinear");
    }
    return v;
  }
  v.evidence = std::move(exact);
  std::visit(
      [&](const auto& rule) {
        using R = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<R, DirichletRelationRule>) {
          terminal(v, VerdictStatus::kSufficientConditionFails, "level_sum_closed_form_grows_like_2^m");
        } else if constexpr (std::is_same_v<R, CantorTrigRule>) {
          // beta_e0 + beta_e1 <= sqrt 2, so each level multiplies the sum by at
          // least 1 + 1/(1 + sqrt 2).
          terminal(v, VerdictStatus::kSufficientConditionFails, "level_factor_at_least_1_plus_1_over_1_plus_sqrt2");
        } else if constexpr (std::is_same_v<R, TableRule>) {
          const double factor = second_over_first(rule.fallback, 0) + second_over_first(rule.fallback, 1);
          v.auxiliary["eventual_level_factor"] = {{table_horizon(rule) + 1, factor}};
          if (factor > 1.0) {
            terminal(v, VerdictStatus::kSufficientConditionFails, "eventual_level_factor_exceeds_one");
          } else {
            terminal(v, VerdictStatus::kHolds, "eventual_level_factor_one");
          }
        }
      },
      sys.rule);
  return v;
}

// ---------------------------------------------------------------- Gaussian

std::vector<Verdict> gaussian_conditions(const GaussianSystem& sys, const PartitionChain& chain, int depth) {
  validate(HistogramSystem{sys});
  if (depth < 0) throw ValidationError("evaluation depth must be nonnegative");
  const bool diagonal = std::holds_alternative<DiagonalCovariance>(sys.covariance);
  const bool dense = std::holds_alternative<KernelCovariance>(sys.covariance) ||
                     std::holds_alternative<GreensCovariance>(sys.covariance);
  const bool dyadic = chain.kind() == ChainKind::kDyadic;
  const int top = std::min<int>(depth, static_cast<int>(chain.depth()));

  Verdict diag = make("gaussian_diagonal_vague", "P-Gauss");
  Verdict spectral = make("gaussian_spectral", "P-Gauss");
  Verdict weak = make("gaussian_weak", "P-weak-signed");
  Verdict trace = make("gaussian_trace", "P-Gauss");
  trace.note = "reported without a verdict";

  double whole = 0.0;
  bool capped = false;
  for (int m = 0; m <= top; ++m) {
    const Partition& p = *chain.level(static_cast<std::size_t>(m));
    if (dense && static_cast<Eigen::Index>(p.size()) > kNumericSpectrumCap) {
      capped = true;
      break;
    }
    const Covariance cov = assemble_sigma(sys.covariance, p);
    const Eigen::VectorXd d = cov.diagonal_entries();
    if (m == 0) whole = cov.total();
    if (diagonal) diag.evidence.emplace_back(m, d.size() ? d.maxCoeff() : 0.0);
    spectral.evidence.emplace_back(m, static_cast<double>(cov.size()) * cov.tau_max());
    weak.evidence.emplace_back(m, d.cwiseMax(0.0).cwiseSqrt().sum());
    trace.evidence.emplace_back(m, cov.trace());
  }
  if (capped) {
    const std::string note = "numeric evaluation stops at " + std::to_string(kNumericSpectrumCap) + " cells";
    spectral.note = weak.note = trace.note = note;
  }

  // Diagonal-vague: max sigma^2(A) -> 0.
  if (const auto* dc = std::get_if<DiagonalCovariance>(&sys.covariance)) {
    if (dc->sigma2.has_atoms()) {
      terminal(diag, VerdictStatus::kSufficientConditionFails, "atom_lower_bound");
    } else if (dyadic) {
      terminal(diag, VerdictStatus::kHolds, "lebesgue_cells_shrink");
    }
  }

  // Spectral: 1^T Sigma_alpha 1 = Sigma(X x X) at every level, and
  // |alpha| tau_max >= 1^T Sigma 1 by the Rayleigh quotient.
  spectral.auxiliary["total_covariance"] = {{0, whole}};
  if (whole > 0.0) terminal(spectral, VerdictStatus::kSufficientConditionFails, "rayleigh_bound_total_covariance");

  // Weak: sup_alpha sum_A sqrt(Sigma(A x A)) < infinity.
  std::visit(
      [&](const auto& spec) {
        using S = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<S, DiagonalCovariance>) {
          if (spec.sigma2.lebesgue_scale == 0.0) {
            terminal(weak, VerdictStatus::kHolds, "atomic_sum_bound");
          } else if (dyadic) {
            terminal(weak, VerdictStatus::kSufficientConditionFails, "lebesgue_sqrt_growth_2^(m/2)");
          }
        } else if constexpr (std::is_same_v<S, ConstantCovariance>) {
          terminal(weak, VerdictStatus::kHolds, "constant_closed_form_sqrt_c_mu");
        } else if constexpr (std::is_same_v<S, PointMassCovariance>) {
          terminal(weak, VerdictStatus::kHolds, "finite_support_bound");
        } else {
          if (chain.level(0)->domain().bounded()) terminal(weak, VerdictStatus::kHolds, "bounded_kernel_sqrt_sup_mu");
        }
      },
      sys.covariance);
  if (!sys.centred()) weak.note += (weak.note.empty() ? "" : "; ") + std::string("evaluated for the centred part");

  std::vector<Verdict> out;
  if (diagonal) out.push_back(std::move(diag));
  out.push_back(std::move(spectral));
  out.push_back(std::move(weak));
  out.push_back(std::move(trace));
  return out;
}

// ---------------------------------------------------------------- Dirichlet

Verdict dirichlet_condition(const DirichletSystem& sys, const Domain& domain) {
  const double total = sys.base.total(domain);
  if (!(total > 0.0)) throw DegenerateSystem("base measure has total mass 0");
  Verdict v = make("dirichlet_tight", "P-tight");
  v.evidence = {{0, total}};
  terminal(v, VerdictStatus::kHolds, "dirichlet_unconditional_existence");
  if (sys.base.purely_atomic()) v.note = "purely atomic base: fixed-atomic regime";
  return v;
}

Verdict dirichlet_weak_condition(const DirichletSystem& sys, const Domain& domain) {
  const double total = sys.base.total(domain);
  if (!(total > 0.0)) throw DegenerateSystem("base measure has total mass 0");
  Verdict v = make("dirichlet_weak", "P-weak");
  v.evidence = {{0, total}};
  if (sys.base.purely_atomic()) {
    terminal(v, VerdictStatus::kHolds, "purely_atomic_base");
  } else {
    terminal(v, VerdictStatus::kSufficientConditionFails, "base_not_purely_atomic");
  }
  return v;
}

// ---------------------------------------------------------------- Leakage

LeakageReport leakage_counterexample(double delta, int depth, std::vector<double> compacts) {
  if (!(delta >= 0.0 && delta < 1.0)) throw ValidationError("delta must lie in [0, 1)");
  if (depth < 2) throw ValidationError("the counterexample starts at depth 2");
  if (compacts.empty()) {
    for (int k = -1; k <= depth; ++k) compacts.push_back(std::ldexp(1.0, k));
  }
  std::sort(compacts.begin(), compacts.end());
  for (double K : compacts) {
    if (!(K > 0.0) || !std::isfinite(K)) throw ValidationError("candidate compacts need 0 < K < infinity");
  }
  LeakageReport report;
  report.delta = delta;
  const LeakageSystem sys{delta, false};
  const PartitionChain line = leakage_chain(depth, false);
  const PartitionChain boundary = leakage_chain(depth, true);

  for (int n = 2; n <= depth; ++n) {
    const PartitionPtr& p = line.level(static_cast<std::size_t>(n));
    const Histogram h = leakage_histogram(sys, p);
    std::optional<LeakageRow> best;
    for (double K : compacts) {
      const Rational k = exact_rational(K);
      LeakageRow row{n, K, 0.0, false};
      for (std::size_t i = 0; i < p->size(); ++i) {
        if (!p->cell(i).intersects_closed(-k, k)) row.outside_mass += h[i];
      }
      row.escaped = !p->cell(0).intersects_closed(-k, k) && !p->cell(p->size() - 1).intersects_closed(-k, k);
      if (row.escaped) best = row;
      report.rows.push_back(row);
    }
    if (best) report.summary.push_back(*best);

    const PartitionPtr& b = boundary.level(static_cast<std::size_t>(n));
    const Histogram hb = leakage_histogram(LeakageSystem{delta, true}, b);
    for (int k = 2; k <= depth; ++k) {
      const double r = std::ldexp(1.0, -k);
      BoundaryRow row{n, r, 0.0};
      for (std::size_t i = 0; i < b->size(); ++i) {
        const Cell& c = b->cell(i);
        const bool near_zero = c.upper.to_double() < r || (c.singleton && c.lower.to_double() < r);
        const bool near_one = c.lower.to_double() > 1.0 - r;
        if (near_zero || near_one) row.boundary_mass += hb[i];
      }
      report.boundary_rows.push_back(row);
    }
  }
  report.verdict = leakage_tight_condition(sys, depth);
  return report;
}

Verdict leakage_tight_condition(const LeakageSystem& sys, int depth) {
  validate(HistogramSystem{sys});
  Verdict v = make("leakage_tight", "P-tight");
  const PartitionChain chain = leakage_chain(std::max(depth, 2), sys.boundary);
  for (int n = 2; n <= std::max(depth, 2); ++n) {
    const PartitionPtr& p = chain.level(static_cast<std::size_t>(n));
    const Histogram h = leakage_histogram(sys, p);
    const std::size_t first = sys.boundary ? 1 : 0;
    const std::size_t last = sys.boundary ? p->size() - 2 : p->size() - 1;
    v.evidence.emplace_back(n, h[first] + h[last]);
  }
  if (sys.delta > 0.0) {
    terminal(v, VerdictStatus::kFails, "outer_mass_escapes_every_compact");
    v.note = "no tight limit: mass delta leaves every compact";
  } else {
    terminal(v, VerdictStatus::kHolds, "no_outer_mass");
  }
  return v;
}

}  // namespace histolim
