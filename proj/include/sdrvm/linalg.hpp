#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>

#include "sdrvm/types.hpp"

namespace sdrvm {

struct SpdSolveResult {
  Eigen::MatrixXd x;
  double logdet;  // log det of the system matrix
};

/// Solve M X = R for symmetric positive definite M via Cholesky and return
/// log det M as a by-product. Throws NotPositiveDefinite on a non-positive
/// pivot, which downstream solvers interpret as precision collapse.
inline SpdSolveResult spd_solve(const Eigen::MatrixXd& m, const Eigen::MatrixXd& r) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw DimensionMismatch("spd_solve requires a square matrix");
  if (r.rows() != m.rows())
    throw DimensionMismatch("right-hand side rows do not match system size");
  const double scale = m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (scale > 0 ? scale : 1.0))
    throw NotSymmetric("spd_solve requires a symmetric matrix");

  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("Cholesky factorization failed: matrix is not positive definite");

  double logdet = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double pivot = l(i, i);
    if (!(pivot > 0.0) || !std::isfinite(pivot))
      throw NotPositiveDefinite("non-positive Cholesky pivot");
    logdet += 2.0 * std::log(pivot);
  }
  return {llt.solve(r), logdet};
}

/// Inverse of a symmetric positive definite matrix, plus log det.
inline SpdSolveResult spd_inverse(const Eigen::MatrixXd& m) {
  return spd_solve(m, Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

}  // namespace sdrvm
