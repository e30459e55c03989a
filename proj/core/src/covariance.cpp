#include "histolim/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "histolim/error.hpp"

namespace histolim {
namespace {

constexpr Eigen::Index kMaxDenseCells = 2048;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Rejects eigenvalues below -tol * tau_max and zeroes those within tolerance.
double clip_threshold(const Eigen::VectorXd& values) {
  const double top = values.size() ? std::max(values.maxCoeff(), 0.0) : 0.0;
  if (values.size() && values.minCoeff() < -Covariance::kClipTolerance * top) {
    throw InvalidCovariance("covariance has eigenvalue " + std::to_string(values.minCoeff()) +
                            " below the tolerance -1e-10 * " + std::to_string(top));
  }
  return Covariance::kClipTolerance * top;
}

Eigen::VectorXd clipped(Eigen::VectorXd values) {
  const double cut = clip_threshold(values);
  for (auto& v : values) {
    if (v <= cut) v = 0.0;
  }
  return values;
}

Eigen::VectorXd standard_normal(RandomStream& s, Eigen::Index n) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = s.normal();
  return z;
}

}  // namespace

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw ValidationError("Gauss-Legendre order must be positive");
  GaussLegendre rule{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

Covariance Covariance::diagonal(Eigen::VectorXd d) {
  Covariance c;
  c.structure_ = Structure::kDiagonal;
  c.n_ = d.size();
  c.diag_ = clipped(std::move(d));
  c.eigenvalues_ = c.diag_;
  std::sort(c.eigenvalues_.begin(), c.eigenvalues_.end());
  return c;
}

Covariance Covariance::low_rank(Eigen::MatrixXd factor) {
  Covariance c;
  c.structure_ = Structure::kLowRank;
  c.n_ = factor.rows();
  const Eigen::Index r = factor.cols();
  c.eigenvalues_ = Eigen::VectorXd::Zero(c.n_);
  if (r > 0) {
    // The nonzero spectrum of F F^T is that of F^T F.
    const Eigen::MatrixXd gram = factor.transpose() * factor;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    Eigen::VectorXd top = es.eigenvalues();
    const double cut = Covariance::kClipTolerance * std::max(top.maxCoeff(), 0.0);
    for (auto& v : top) {
      if (v <= cut) v = 0.0;
    }
    const Eigen::Index k = std::min(r, c.n_);
    c.eigenvalues_.tail(k) = top.tail(k);
  }
  c.factor_ = std::move(factor);
  return c;
}

Covariance Covariance::dense(Eigen::MatrixXd sigma) {
  if (sigma.rows() != sigma.cols()) throw InvalidCovariance("covariance matrix must be square");
  if (sigma.rows() > kMaxDenseCells) {
    throw CapacityError("dense covariance limited to " + std::to_string(kMaxDenseCells) + " cells");
  }
  const double scale = sigma.size() ? std::max(sigma.cwiseAbs().maxCoeff(), 1e-300) : 1.0;
  if (sigma.size() && (sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidCovariance("covariance matrix is not symmetric");
  }
  Covariance c;
  c.structure_ = Structure::kDense;
  c.n_ = sigma.rows();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success) throw InvalidCovariance("eigendecomposition failed");
  c.eigenvalues_ = clipped(es.eigenvalues());
  c.factor_ = es.eigenvectors() * c.eigenvalues_.cwiseSqrt().asDiagonal();
  c.sigma_ = std::move(sigma);
  return c;
}

double Covariance::entry(Eigen::Index i, Eigen::Index j) const {
  switch (structure_) {
    case Structure::kDiagonal:
      return i == j ? diag_[i] : 0.0;
    case Structure::kLowRank:
      return factor_.row(i).dot(factor_.row(j));
    case Structure::kDense:
      break;
  }
  return sigma_(i, j);
}

Eigen::VectorXd Covariance::diagonal_entries() const {
  switch (structure_) {
    case Structure::kDiagonal:
      return diag_;
    case Structure::kLowRank:
      return factor_.rowwise().squaredNorm();
    case Structure::kDense:
      break;
  }
  return sigma_.diagonal();
}

Eigen::MatrixXd Covariance::to_dense() const {
  switch (structure_) {
    case Structure::kDiagonal:
      return diag_.asDiagonal();
    case Structure::kLowRank:
      return factor_ * factor_.transpose();
    case Structure::kDense:
      break;
  }
  return sigma_;
}

double Covariance::tau_max() const { return n_ ? eigenvalues_[n_ - 1] : 0.0; }

double Covariance::trace() const { return diagonal_entries().sum(); }

double Covariance::total() const {
  switch (structure_) {
    case Structure::kDiagonal:
      return diag_.sum();
    case Structure::kLowRank:
      return factor_.colwise().sum().squaredNorm();
    case Structure::kDense:
      break;
  }
  return sigma_.sum();
}

Eigen::VectorXd Covariance::draw(RandomStream& s) const {
  switch (structure_) {
    case Structure::kDiagonal: {
      Eigen::VectorXd z = standard_normal(s, n_);
      return z.cwiseProduct(diag_.cwiseSqrt());
    }
    case Structure::kLowRank:
      return factor_ * standard_normal(s, factor_.cols());
    case Structure::kDense:
      break;
  }
  return factor_ * standard_normal(s, n_);
}

Covariance assemble_sigma(const CovarianceSpec& spec, const Partition& p) {
  const auto n = static_cast<Eigen::Index>(p.size());
  return std::visit(
      Overloaded{
          [&](const DiagonalCovariance& d) {
            const auto v = d.sigma2.on(p);
            return Covariance::diagonal(Eigen::Map<const Eigen::VectorXd>(v.data(), n));
          },
          [&](const ConstantCovariance& c) {
            const auto mu = c.mu.on(p);
            Eigen::MatrixXd f(n, 1);
            for (Eigen::Index i = 0; i < n; ++i) f(i, 0) = std::sqrt(c.c) * mu[static_cast<std::size_t>(i)];
            return Covariance::low_rank(std::move(f));
          },
          [&](const PointMassCovariance& pm) {
            const auto s = static_cast<Eigen::Index>(pm.sites.size());
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pm.sigma0);
            const Eigen::MatrixXd w = es.eigenvectors() * clipped(es.eigenvalues()).cwiseSqrt().asDiagonal();
            Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, s);
            for (Eigen::Index k = 0; k < s; ++k) {
              const double site = pm.sites[static_cast<std::size_t>(k)];
              const Rational r = exact_rational(site);
              if (!p.domain().contains(r)) throw DomainError("site " + std::to_string(site) + " outside the domain");
              f.row(static_cast<Eigen::Index>(cell_of(p, r))) += w.row(k);
            }
            return Covariance::low_rank(std::move(f));
          },
          [&](const auto& kernel_spec) {
            const GaussLegendre rule = gauss_legendre(kernel_spec.order);
            const auto q = static_cast<std::size_t>(kernel_spec.order);
            // Quadrature points and weights per cell; singletons carry none.
            std::vector<std::vector<double>> xs(p.size()), ws(p.size());
            for (std::size_t i = 0; i < p.size(); ++i) {
              const Cell& c = p.cell(i);
              if (c.singleton) continue;
              if (!c.bounded()) throw DomainError("kernel covariances need bounded cells");
              const double a = c.lower.to_double();
              const double b = c.upper.to_double();
              for (std::size_t k = 0; k < q; ++k) {
                xs[i].push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[k]);
                ws[i].push_back(0.5 * (b - a) * rule.weights[k]);
              }
            }
            Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
            for (std::size_t i = 0; i < p.size(); ++i) {
              for (std::size_t j = i; j < p.size(); ++j) {
                double v = 0.0;
                for (std::size_t a = 0; a < xs[i].size(); ++a) {
                  double row = 0.0;
                  for (std::size_t b = 0; b < xs[j].size(); ++b) {
                    row += ws[j][b] * kernel_value(spec, xs[i][a], xs[j][b]);
                  }
                  v += ws[i][a] * row;
                }
                const auto ii = static_cast<Eigen::Index>(i);
                const auto jj = static_cast<Eigen::Index>(j);
                sigma(ii, jj) = v;
                sigma(jj, ii) = v;
              }
            }
            return Covariance::dense(std::move(sigma));
          },
      },
      spec);
}

}  // namespace histolim
