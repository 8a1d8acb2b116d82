#pragma once

#include <Eigen/Dense>

#include "dgsqp/core/errors.hpp"

namespace dgsqp::qp {

// Nearest positive semidefinite matrix in Frobenius norm: clamp the negative
// eigenvalues of the symmetrized input to zero.
inline Eigen::MatrixXd project_psd(const Eigen::MatrixXd& X, double sym_tol = 1e-9) {
  if (X.rows() != X.cols()) throw ContractViolation("project_psd: matrix not square");
  if ((X - X.transpose()).cwiseAbs().maxCoeff() > sym_tol)
    throw ContractViolation("project_psd: matrix not symmetric within tolerance");
  const Eigen::MatrixXd Xs = 0.5 * (X + X.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Xs);
  if (eig.info() != Eigen::Success) throw ContractViolation("project_psd: eigensolver failed");
  Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd Y = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (Y + Y.transpose());
}

}  // namespace dgsqp::qp
