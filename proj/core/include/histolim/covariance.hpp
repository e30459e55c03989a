#pragma once

#include <vector>

#include <Eigen/Dense>

#include "histolim/random_stream.hpp"
#include "histolim/systems.hpp"

namespace histolim {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(int n);

/// An assembled histogram covariance matrix with a symmetric factorization.
/// Diagonal and low-rank matrices are held in factored form only, so large
/// partitions never materialize |alpha| x |alpha| storage.
class Covariance {
 public:
  enum class Structure { kDiagonal, kLowRank, kDense };

  static constexpr double kClipTolerance = 1e-10;

  static Covariance diagonal(Eigen::VectorXd d);
  /// Sigma = F F^T.
  static Covariance low_rank(Eigen::MatrixXd factor);
  static Covariance dense(Eigen::MatrixXd sigma);

  Structure structure() const noexcept { return structure_; }
  Eigen::Index size() const noexcept { return n_; }

  double entry(Eigen::Index i, Eigen::Index j) const;
  Eigen::VectorXd diagonal_entries() const;
  Eigen::MatrixXd to_dense() const;
  /// Clipped eigenvalues in ascending order.
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  double tau_max() const;
  double trace() const;
  /// 1^T Sigma 1.
  double total() const;
  /// Sigma^{1/2} z for a fresh standard normal vector z.
  Eigen::VectorXd draw(RandomStream& s) const;

 private:
  Structure structure_ = Structure::kDiagonal;
  Eigen::Index n_ = 0;
  Eigen::VectorXd diag_;      // diagonal: entries
  Eigen::MatrixXd factor_;    // low rank: F; dense: V sqrt(tau)
  Eigen::MatrixXd sigma_;     // dense only
  Eigen::VectorXd eigenvalues_;
};

/// Sigma(A_i x A_j) for every pair of cells of p.
Covariance assemble_sigma(const CovarianceSpec& spec, const Partition& p);

}  // namespace histolim
