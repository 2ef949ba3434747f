#pragma once

#include <Eigen/Core>

namespace nuq {

struct SymmetricEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // column i pairs with values[i]
};

/// Full eigendecomposition of a symmetric matrix (LAPACK dsyevd); only the
/// lower triangle is read.
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a);

/// D(i, j) = ||a.col(i) - b.col(j)||^2, clamped at zero.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace nuq
