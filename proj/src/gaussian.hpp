#pragma once

#include <Eigen/Dense>

#include "heartcast/rng.hpp"

namespace heartcast::detail {

/// Draws mean + sum_k z_k sqrt(lambda_k) v_k from the eigendecomposition of a
/// symmetric PSD covariance. Negative eigenvalues within tolerance are zeroed.
class PrincipalSampler {
 public:
  PrincipalSampler(Eigen::VectorXd mean, const Eigen::MatrixXd& covariance);

  Eigen::Index dimension() const { return mean_.size(); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  /// One draw, not clipped.
  Eigen::VectorXd draw(Rng& rng) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd scaled_axes_;  // column k = sqrt(lambda_k) v_k
};

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& symmetric);

}  // namespace heartcast::detail
