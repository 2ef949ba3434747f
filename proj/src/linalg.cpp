#include "nuq/linalg.hpp"

#include <lapacke.h>

#include <string>

#include "nuq/error.hpp"

namespace nuq {

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw ConfigError("symmetric_eigen: matrix is not square");
  const auto n = static_cast<lapack_int>(a.rows());
  SymmetricEigen out;
  if (n == 0) return out;
  Eigen::MatrixXd work = a;
  Eigen::VectorXd ascending(n);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, work.data(), n, ascending.data());
  if (info != 0) {
    throw NumericalError("dsyevd failed to converge (info = " + std::to_string(info) + ")");
  }
  out.values = ascending.reverse();
  out.vectors = work.rowwise().reverse();
  return out;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::VectorXd na = a.colwise().squaredNorm().transpose();
  const Eigen::RowVectorXd nb = b.colwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * (a.transpose() * b);
  d.colwise() += na;
  d.rowwise() += nb;
  return d.cwiseMax(0.0);
}

}  // namespace nuq
