#include "histolim/systems.hpp"

#include <cmath>
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

void check_pair(const BetaPair& p, const std::string& where) {
  if (!(p.first > 0.0) || !(p.second > 0.0)) {
    throw ValidationError("beta pair at " + where + " must be positive (infinity allowed)");
  }
}

Cell dyadic_cell(const Domain& domain, std::uint64_t k, int level) {
  const Rational a = domain.lower.value();
  const Rational h = (domain.upper.value() - a) / Rational(boost::multiprecision::cpp_int(1) << level);
  return Cell::interval(Rational(a + h * k), Rational(a + h * (k + 1)));
}

}  // namespace

BetaPair beta_pair(const BetaRule& rule, const CellIndex& parent) {
  return std::visit(
      Overloaded{
          [&](const HomogeneousRule& r) {
            const double b = r.expr(parent.level() + 1);
            return BetaPair{b, b};
          },
          [&](const DirichletRelationRule& r) {
            const int level = parent.level() + 1;
            const std::uint64_t k = parent.bits() << 1;
            return BetaPair{r.measure.of(dyadic_cell(r.domain, k, level)),
                            r.measure.of(dyadic_cell(r.domain, k + 1, level))};
          },
          [&](const CantorTrigRule&) {
            const double x = to_double(cantor_midpoint(parent));
            const double angle = 0.5 * std::numbers::pi * x;
            return BetaPair{std::cos(angle), std::sin(angle)};
          },
          [&](const TableRule& r) {
            if (const auto it = r.nodes.find(parent); it != r.nodes.end()) return it->second;
            if (const auto it = r.levels.find(parent.level()); it != r.levels.end()) return it->second;
            return r.fallback;
          },
      },
      rule);
}

std::string rule_name(const BetaRule& rule) {
  return std::visit(Overloaded{
                        [](const HomogeneousRule& r) { return "homogeneous(" + r.expr.text() + ")"; },
                        [](const DirichletRelationRule&) { return std::string("dirichlet_relation"); },
                        [](const CantorTrigRule&) { return std::string("cantor_trig"); },
                        [](const TableRule&) { return std::string("table"); },
                    },
                    rule);
}

std::string covariance_name(const CovarianceSpec& spec) {
  return std::visit(Overloaded{
                        [](const DiagonalCovariance&) { return "diagonal"; },
                        [](const ConstantCovariance&) { return "constant"; },
                        [](const PointMassCovariance&) { return "point_mass"; },
                        [](const KernelCovariance&) { return "kernel"; },
                        [](const GreensCovariance&) { return "greens"; },
                    },
                    spec);
}

double kernel_value(const CovarianceSpec& spec, double x, double y) {
  const double r = std::abs(x - y);
  if (const auto* k = std::get_if<KernelCovariance>(&spec)) {
    switch (k->type) {
      case KernelType::kMin:
        return k->variance * std::min(x, y);
      case KernelType::kExponential:
        return k->variance * std::exp(-r / k->length);
      case KernelType::kSquaredExponential:
        return k->variance * std::exp(-0.5 * r * r / (k->length * k->length));
    }
  }
  if (const auto* g = std::get_if<GreensCovariance>(&spec)) {
    switch (g->dimension) {
      case 1:
        return -r + g->c0 + g->c1 * (x + y);
      case 2:
        return -std::log(r + g->cutoff);
      case 3:
        return 1.0 / (r + g->cutoff);
      default:
        break;
    }
    throw ValidationError("Green's functions are available for d = 1, 2, 3");
  }
  throw Unsupported("covariance " + covariance_name(spec) + " has no pointwise kernel");
}

std::string family_name(const HistogramSystem& sys) {
  return std::visit(Overloaded{
                        [](const DirichletSystem&) { return "dirichlet"; },
                        [](const PolyaTreeSystem&) { return "polya"; },
                        [](const GaussianSystem&) { return "gaussian"; },
                        [](const LeakageSystem&) { return "leakage"; },
                    },
                    sys);
}

bool completely_random(const HistogramSystem& sys) {
  if (std::holds_alternative<DirichletSystem>(sys)) return true;
  if (const auto* g = std::get_if<GaussianSystem>(&sys)) {
    if (std::holds_alternative<DiagonalCovariance>(g->covariance)) return true;
    if (const auto* pm = std::get_if<PointMassCovariance>(&g->covariance)) {
      const Eigen::MatrixXd off = pm->sigma0 - Eigen::MatrixXd(pm->sigma0.diagonal().asDiagonal());
      return off.cwiseAbs().maxCoeff() == 0.0;
    }
  }
  return false;
}

bool probability_family(const HistogramSystem& sys) { return !std::holds_alternative<GaussianSystem>(sys); }

void validate(const HistogramSystem& sys) {
  std::visit(
      Overloaded{
          [](const DirichletSystem&) {},
          [](const PolyaTreeSystem& p) {
            if (!(p.p0 >= 0.0 && p.p0 < 1.0)) throw ValidationError("p0 must lie in [0, 1)");
            if (const auto* t = std::get_if<TableRule>(&p.rule)) {
              for (const auto& [node, pair] : t->nodes) check_pair(pair, "node '" + node.to_string() + "'");
              for (const auto& [level, pair] : t->levels) check_pair(pair, "level " + std::to_string(level));
              check_pair(t->fallback, "fallback");
            }
            if (const auto* d = std::get_if<DirichletRelationRule>(&p.rule)) {
              if (!(d->measure.lebesgue_scale > 0.0) || !d->measure.nonnegative()) {
                throw ValidationError("Dirichlet relation needs a positive Lebesgue part");
              }
              if (!d->domain.bounded()) throw ValidationError("Dirichlet relation needs a bounded domain");
            }
          },
          [](const GaussianSystem& g) {
            std::visit(
                Overloaded{
                    [](const DiagonalCovariance& d) {
                      if (!d.sigma2.nonnegative()) throw ValidationError("diagonal covariance must be nonnegative");
                    },
                    [](const ConstantCovariance& c) {
                      if (!(c.c > 0.0) || !std::isfinite(c.c)) throw ValidationError("constant covariance needs c > 0");
                      if (!c.mu.nonnegative()) throw ValidationError("constant covariance measure must be nonnegative");
                    },
                    [](const PointMassCovariance& pm) {
                      const auto n = static_cast<Eigen::Index>(pm.sites.size());
                      if (n == 0) throw ValidationError("point-mass covariance needs at least one site");
                      if (pm.sigma0.rows() != n || pm.sigma0.cols() != n) {
                        throw ValidationError("point-mass matrix must be |S| x |S|");
                      }
                      const double scale = std::max(1.0, pm.sigma0.cwiseAbs().maxCoeff());
                      if ((pm.sigma0 - pm.sigma0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
                        throw ValidationError("point-mass matrix must be symmetric");
                      }
                      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pm.sigma0, Eigen::EigenvaluesOnly);
                      const double top = es.eigenvalues().maxCoeff();
                      if (es.eigenvalues().minCoeff() < -1e-10 * std::max(top, 0.0)) {
                        throw InvalidCovariance("point-mass matrix is not positive semidefinite");
                      }
                    },
                    [](const KernelCovariance& k) {
                      if (!(k.length > 0.0) || !(k.variance > 0.0)) {
                        throw ValidationError("kernel length and variance must be positive");
                      }
                      if (k.order < 1 || k.order > 64) throw ValidationError("quadrature order must be in 1..64");
                    },
                    [](const GreensCovariance& gr) {
                      if (gr.dimension < 1 || gr.dimension > 3) {
                        throw ValidationError("Green's functions are available for d = 1, 2, 3");
                      }
                      if (!(gr.cutoff > 0.0)) throw ValidationError("UV cutoff must be positive");
                      if (gr.order < 1 || gr.order > 64) throw ValidationError("quadrature order must be in 1..64");
                    },
                },
                g.covariance);
          },
          [](const LeakageSystem& l) {
            if (!(l.delta >= 0.0 && l.delta < 1.0)) throw ValidationError("delta must lie in [0, 1)");
          },
      },
      sys);
}

}  // namespace histolim
