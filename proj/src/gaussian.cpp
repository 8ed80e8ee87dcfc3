#include "gaussian.hpp"

#include <algorithm>
#include <cmath>

namespace heartcast::detail {

PrincipalSampler::PrincipalSampler(Eigen::VectorXd mean, const Eigen::MatrixXd& covariance)
    : mean_(std::move(mean)) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  eigenvalues_ = solver.eigenvalues().cwiseMax(0.0);
  scaled_axes_ = solver.eigenvectors() * eigenvalues_.cwiseSqrt().asDiagonal();
}

Eigen::VectorXd PrincipalSampler::draw(Rng& rng) const {
  Eigen::VectorXd z(mean_.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
  return mean_ + scaled_axes_ * z;
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace heartcast::detail
