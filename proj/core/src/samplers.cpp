#include "histolim/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "histolim/error.hpp"

namespace histolim {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Mean and second moment of the child-`digit` share under Beta(a, b),
// with the extended conventions for infinite parameters.
double share_mean(const BetaPair& p, int digit) {
  const auto [a, b] = p;
  if (std::isinf(a) && std::isinf(b)) return 0.5;
  if (std::isinf(a)) return digit == 0 ? 1.0 : 0.0;
  if (std::isinf(b)) return digit == 0 ? 0.0 : 1.0;
  return (digit == 0 ? a : b) / (a + b);
}

double share_second_moment(const BetaPair& p, int digit) {
  const auto [a, b] = p;
  if (std::isinf(a) && std::isinf(b)) return 0.25;
  if (std::isinf(a)) return digit == 0 ? 1.0 : 0.0;
  if (std::isinf(b)) return digit == 0 ? 0.0 : 1.0;
  const double x = digit == 0 ? a : b;
  return x * (x + 1.0) / ((a + b) * (a + b + 1.0));
}

std::vector<double> dirichlet_draw(const std::vector<double>& nu, RandomStream& s) {
  std::vector<double> logs(nu.size(), -std::numeric_limits<double>::infinity());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] > 0.0) {
      logs[i] = s.log_gamma(nu[i]);
      top = std::max(top, logs[i]);
    }
  }
  std::vector<double> out(nu.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] > 0.0) {
      out[i] = std::exp(logs[i] - top);
      total += out[i];
    }
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> dirichlet_parameters(const DirichletSystem& sys, const PartitionPtr& p) {
  auto nu = sys.base.on(p);
  double total = 0.0;
  for (double v : nu) total += v;
  if (!(total > 0.0)) throw DegenerateSystem("base measure vanishes on every cell");
  return nu;
}

void require_tree(const PartitionChain& chain, std::size_t m) {
  if (m > chain.depth()) throw ValidationError("depth exceeds chain depth");
  for (std::size_t l = 0; l <= m; ++l) {
    const auto level = chain.level(l)->binary_level();
    if (!level || static_cast<std::size_t>(*level) != l) {
      throw ValidationError("Polya trees need a dyadic tree chain", "not_dyadic");
    }
  }
}

// Leaf k of the tree at level m sits at tree_cells[k]; the singleton, if any,
// at `singleton`.
void locate_tree(const Partition& p, std::vector<std::size_t>& tree_cells, std::ptrdiff_t& singleton) {
  tree_cells.clear();
  singleton = -1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.label(i)) {
      tree_cells.push_back(i);
    } else if (p.cell(i).singleton && singleton < 0) {
      singleton = static_cast<std::ptrdiff_t>(i);
    } else {
      throw ValidationError("unexpected unlabeled cell " + p.cell(i).to_string());
    }
  }
}

std::vector<double> leakage_values(const LeakageSystem& sys, const Partition& p) {
  const double d = sys.delta;
  std::vector<double> out(p.size(), 0.0);
  if (!sys.boundary) {
    const Rational lo(-1), hi(1);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Cell& c = p.cell(i);
      double v = 0.0;
      if (!c.lower.is_finite()) v += 0.5 * d;
      if (!c.upper.is_finite()) v += 0.5 * d;
      const Endpoint a = std::max(c.lower, Endpoint(lo));
      const Endpoint b = std::min(c.upper, Endpoint(hi));
      if (a < b) v += (1.0 - d) * to_double((b.value() - a.value()) / 2);
      out[i] = v;
    }
    return out;
  }
  // Boundary variant: outer cells touch 0 and 1; the interior mass is
  // uniform on (1/4, 3/4], the image of (-1, 1].
  const Rational lo(1, 4), hi(3, 4);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Cell& c = p.cell(i);
    if (c.singleton) continue;
    double v = 0.0;
    if (c.lower == p.domain().lower) v += 0.5 * d;
    if (c.upper == p.domain().upper) v += 0.5 * d;
    const Endpoint a = std::max(c.lower, Endpoint(lo));
    const Endpoint b = std::min(c.upper, Endpoint(hi));
    if (a < b) v += (1.0 - d) * to_double((b.value() - a.value()) * 2);
    out[i] = v;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- Dirichlet

Histogram sample_dirichlet(const DirichletSystem& sys, const PartitionPtr& p, RandomStream& s) {
  return Histogram(p, dirichlet_draw(dirichlet_parameters(sys, p), s), HistogramKind::kProbability);
}

Histogram dirichlet_mean(const DirichletSystem& sys, const PartitionPtr& p) {
  auto nu = dirichlet_parameters(sys, p);
  double total = 0.0;
  for (double v : nu) total += v;
  for (double& v : nu) v /= total;
  return Histogram(p, std::move(nu), HistogramKind::kProbability);
}

// ---------------------------------------------------------------- Polya

double polya_mean(const PolyaTreeSystem& sys, const CellIndex& e) {
  double value = 1.0;
  for (int l = 1; l <= e.level(); ++l) value *= share_mean(beta_pair(sys.rule, e.prefix(l - 1)), e.digit(l));
  return value;
}

double polya_second_moment(const PolyaTreeSystem& sys, const CellIndex& e) {
  double value = 1.0;
  for (int l = 1; l <= e.level(); ++l) {
    value *= share_second_moment(beta_pair(sys.rule, e.prefix(l - 1)), e.digit(l));
  }
  return value;
}

Histogram sample_polya(const PolyaTreeSystem& sys, const PartitionChain& chain, std::size_t m, RandomStream& s) {
  return LevelSampler(sys, chain, m).draw(s);
}

Histogram polya_mean_histogram(const PolyaTreeSystem& sys, const PartitionChain& chain, std::size_t m) {
  require_tree(chain, m);
  const PartitionPtr& p = chain.level(m);
  std::vector<std::size_t> cells;
  std::ptrdiff_t singleton = -1;
  locate_tree(*p, cells, singleton);
  if (sys.p0 > 0.0 && singleton < 0) throw ValidationError("p0 > 0 needs a singleton cell");
  std::vector<double> values(p->size(), 0.0);
  // Top-down products keep the cost linear in the number of cells.
  std::vector<double> mass{1.0 - sys.p0};
  for (std::size_t l = 0; l < m; ++l) {
    std::vector<double> next(mass.size() * 2);
    for (std::size_t k = 0; k < mass.size(); ++k) {
      const BetaPair pair = beta_pair(sys.rule, CellIndex::from_bits(k, static_cast<int>(l)));
      next[2 * k] = mass[k] * share_mean(pair, 0);
      next[2 * k + 1] = mass[k] * share_mean(pair, 1);
    }
    mass = std::move(next);
  }
  for (std::size_t k = 0; k < cells.size(); ++k) values[cells[k]] = mass[k];
  if (singleton >= 0) values[static_cast<std::size_t>(singleton)] = sys.p0;
  return Histogram(p, std::move(values), HistogramKind::kProbability, false);
}

// ---------------------------------------------------------------- Gaussian

Histogram sample_gaussian(const GaussianSystem& sys, const PartitionPtr& p, RandomStream& s) {
  const Covariance cov = assemble_sigma(sys.covariance, *p);
  const Eigen::VectorXd phi = cov.draw(s);
  const auto centre = sys.centre.on(*p);
  std::vector<double> values(p->size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = centre[i] + phi[static_cast<Eigen::Index>(i)];
  return Histogram(p, std::move(values), HistogramKind::kSigned);
}

Histogram gaussian_q_alpha(const GaussianSystem& sys, const PartitionPtr& p) {
  if (!sys.centred()) throw Unsupported("the marginal |Phi| formula needs a centred system");
  const Covariance cov = assemble_sigma(sys.covariance, *p);
  const Eigen::VectorXd d = cov.diagonal_entries();
  std::vector<double> values(p->size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::sqrt(2.0 * std::max(d[static_cast<Eigen::Index>(i)], 0.0) / std::numbers::pi);
  }
  return Histogram(p, std::move(values), HistogramKind::kPositive);
}

// ---------------------------------------------------------------- Leakage

std::vector<std::vector<double>> leakage_array(int depth) {
  std::vector<std::vector<double>> levels;
  if (depth < 1) return levels;
  levels.push_back({0.0});
  for (int n = 2; n <= depth; ++n) {
    const auto& prev = levels.back();
    std::vector<double> next;
    next.reserve(2 * prev.size() + 1);
    next.push_back(n == 2 ? -1.0 : 2.0 * prev.front());
    for (std::size_t m = 0; m < prev.size(); ++m) {
      next.push_back(prev[m]);
      if (m + 1 < prev.size()) next.push_back(0.5 * (prev[m] + prev[m + 1]));
    }
    next.push_back(n == 2 ? 1.0 : 2.0 * prev.back());
    levels.push_back(std::move(next));
  }
  return levels;
}

PartitionChain leakage_chain(int depth, bool boundary, const ChainLimits& limits) {
  if (depth < 1) throw ValidationError("leakage chains need depth >= 1");
  const auto array = leakage_array(depth);
  PartitionChain line = triangular_chain(array, limits);
  if (!boundary) return line;

  const Domain unit{Rational(0), Rational(1), true, true};
  auto level_partition = [&](const std::vector<double>& points) {
    std::vector<Cell> cells{Cell::point(Rational(0))};
    Endpoint left = Rational(0);
    for (double q : points) {
      const Rational s = exact_rational(0.5 + std::atan(q) / std::numbers::pi);
      cells.push_back(Cell::interval(left, s));
      left = s;
    }
    cells.push_back(Cell::interval(left, Rational(1), false));
    cells.push_back(Cell::point(Rational(1)));
    std::vector<std::optional<CellIndex>> labels(cells.size());
    return std::make_shared<const Partition>(unit, std::move(cells), std::move(labels));
  };
  std::vector<PartitionPtr> levels{level_partition({})};
  for (const auto& points : array) levels.push_back(level_partition(points));
  return PartitionChain(std::move(levels), ChainKind::kCustom);
}

Histogram leakage_histogram(const LeakageSystem& sys, const PartitionPtr& p) {
  return Histogram(p, leakage_values(sys, *p), HistogramKind::kProbability);
}

// ---------------------------------------------------------------- LevelSampler

LevelSampler::LevelSampler(const HistogramSystem& sys, const PartitionChain& chain, std::size_t m)
    : sys_(sys), level_(m) {
  validate(sys_);
  if (m > chain.depth()) throw ValidationError("depth " + std::to_string(m) + " exceeds chain depth");
  partition_ = chain.level(m);
  std::visit(Overloaded{
                 [&](const DirichletSystem& d) { nu_ = dirichlet_parameters(d, partition_); },
                 [&](const PolyaTreeSystem& pt) {
                   require_tree(chain, m);
                   locate_tree(*partition_, tree_cells_, singleton_);
                   if (pt.p0 > 0.0 && singleton_ < 0) throw ValidationError("p0 > 0 needs a singleton cell");
                   for (std::size_t l = 0; l < m; ++l) {
                     std::vector<BetaPair> row(std::size_t{1} << l);
                     for (std::size_t k = 0; k < row.size(); ++k) {
                       row[k] = beta_pair(pt.rule, CellIndex::from_bits(k, static_cast<int>(l)));
                       if (!(row[k].first > 0.0) || !(row[k].second > 0.0)) {
                         throw ValidationError("beta rule gives a nonpositive parameter at '" +
                                               CellIndex::from_bits(k, static_cast<int>(l)).to_string() + "'");
                       }
                     }
                     pairs_.push_back(std::move(row));
                   }
                 },
                 [&](const GaussianSystem& g) {
                   covariance_ = std::make_shared<const Covariance>(assemble_sigma(g.covariance, *partition_));
                   centre_ = g.centre.on(*partition_);
                 },
                 [&](const LeakageSystem& l) { fixed_ = leakage_values(l, *partition_); },
             },
             sys_);
}

Histogram LevelSampler::draw(RandomStream& s) const {
  return std::visit(
      Overloaded{
          [&](const DirichletSystem&) {
            return Histogram(partition_, dirichlet_draw(nu_, s), HistogramKind::kProbability);
          },
          [&](const PolyaTreeSystem& pt) {
            std::vector<double> mass{1.0 - pt.p0};
            for (const auto& row : pairs_) {
              std::vector<double> next(mass.size() * 2);
              for (std::size_t k = 0; k < mass.size(); ++k) {
                const double v = s.beta(row[k].first, row[k].second);
                next[2 * k] = mass[k] * v;
                next[2 * k + 1] = mass[k] * (1.0 - v);
              }
              mass = std::move(next);
            }
            std::vector<double> values(partition_->size(), 0.0);
            for (std::size_t k = 0; k < tree_cells_.size(); ++k) values[tree_cells_[k]] = mass[k];
            if (singleton_ >= 0) values[static_cast<std::size_t>(singleton_)] = pt.p0;
            return Histogram(partition_, std::move(values), HistogramKind::kProbability);
          },
          [&](const GaussianSystem&) {
            const Eigen::VectorXd phi = covariance_->draw(s);
            std::vector<double> values(partition_->size());
            for (std::size_t i = 0; i < values.size(); ++i) {
              values[i] = centre_[i] + phi[static_cast<Eigen::Index>(i)];
            }
            return Histogram(partition_, std::move(values), HistogramKind::kSigned);
          },
          [&](const LeakageSystem&) { return Histogram(partition_, fixed_, HistogramKind::kProbability); },
      },
      sys_);
}

std::vector<Histogram> chain_sample(const HistogramSystem& sys, const PartitionChain& chain, std::size_t m,
                                    RandomStream& s) {
  const LevelSampler sampler(sys, chain, m);
  std::vector<Histogram> levels;
  levels.reserve(m + 1);
  levels.push_back(sampler.draw(s));
  for (std::size_t l = m; l > 0; --l) levels.push_back(project(levels.back(), chain.step(l)));
  std::reverse(levels.begin(), levels.end());
  return levels;
}

Histogram reference_histogram(const HistogramSystem& sys, const PartitionChain& chain, std::size_t m) {
  if (m > chain.depth()) throw ValidationError("depth exceeds chain depth");
  return std::visit(
      Overloaded{
          [&](const DirichletSystem& d) { return dirichlet_mean(d, chain.level(m)); },
          [&](const PolyaTreeSystem& p) { return polya_mean_histogram(p, chain, m); },
          [&](const GaussianSystem& g) { return gaussian_q_alpha(g, chain.level(m)); },
          [&](const LeakageSystem& l) { return leakage_histogram(l, chain.level(m)); },
      },
      sys);
}

std::vector<PathPoint> path_from_histogram(const Histogram& h, bool origin) {
  const Partition& p = *h.partition();
  std::vector<PathPoint> path;
  path.reserve(h.size() + 1);
  if (origin) path.push_back({p.domain().lower.to_double(), 0.0});
  double running = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    running += h[i];
    const Cell& c = p.cell(i);
    path.push_back({(c.singleton ? c.lower : c.upper).to_double(), running});
  }
  return path;
}

}  // namespace histolim
