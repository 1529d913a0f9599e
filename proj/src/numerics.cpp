#include "cisim/numerics.hpp"

#include <limits>

#include "cisim/errors.hpp"

namespace cisim {

Vec solve_symmetric(const Mat& A, const Vec& b) {
  if (A.rows() != A.cols()) throw NumericalError("solve_symmetric: matrix not square");
  if (A.rows() != b.size()) throw NumericalError("solve_symmetric: dimension mismatch");
  if (!A.allFinite() || !b.allFinite()) throw NumericalError("solve_symmetric: non-finite input");

  Eigen::LDLT<Mat> ldlt(A);
  Vec d = ldlt.vectorD().cwiseAbs();
  double dmax = d.maxCoeff();
  double dmin = d.minCoeff();
  double rcond = ldlt.rcond();
  /* rcond alone misses singular-but-consistent systems: the LDLT solve acts
   * like a pseudo-inverse through zero pivots, so the pivot ratio is checked
   * as well. */
  bool pivots_ok = dmax > 0.0 && dmin > std::numeric_limits<double>::epsilon() * dmax;
  if (ldlt.info() != Eigen::Success || !pivots_ok ||
      !(rcond > std::numeric_limits<double>::epsilon())) {
    double cond = dmin > 0.0 ? dmax / dmin : std::numeric_limits<double>::infinity();
    if (rcond > 0.0) cond = std::max(cond, 1.0 / rcond);
    throw SingularSystemError("solve_symmetric: singular system", cond);
  }
  Vec x = ldlt.solve(b);
  x += ldlt.solve(b - A * x); /* one refinement step tightens the residual */
  if (!x.allFinite()) {
    throw SingularSystemError("solve_symmetric: singular system", 1.0 / rcond);
  }
  return x;
}

namespace {

template <typename Matrix>
Matrix pinv_svd(const Matrix& A, double tol) {
  if (A.size() == 0) return Matrix(A.cols(), A.rows());
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  double cut = sv.size() > 0 ? tol * sv(0) : 0.0;
  Vec inv = Vec::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

}

CMat pseudo_inverse(const CMat& A, double tol) { return pinv_svd(A, tol); }

Mat pseudo_inverse(const Mat& A, double tol) { return pinv_svd(A, tol); }

Mat svd_null_basis(const Mat& A, double tol) {
  if (A.size() == 0) throw NumericalError("svd_null_basis: empty matrix");
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  double cut = tol * (sv.size() > 0 ? sv(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++rank;
  }
  /* Singular values beyond min(rows, cols) are implicitly zero. */
  return svd.matrixV().rightCols(A.cols() - rank);
}

int numeric_rank(const Mat& A, double tol) {
  if (A.size() == 0) throw NumericalError("numeric_rank: empty matrix");
  Eigen::JacobiSVD<Mat> svd(A);
  const Vec& sv = svd.singularValues();
  double cut = tol * (sv.size() > 0 ? sv(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++rank;
  }
  return rank;
}

double condition_estimate(const Mat& A) {
  Eigen::JacobiSVD<Mat> svd(A);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return sv(0) / sv(sv.size() - 1);
}

}
