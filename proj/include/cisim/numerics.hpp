#pragma once

#include "cisim/types.hpp"

namespace cisim {

/* Relative threshold below which singular values count as zero. */
inline constexpr double kSvdTol = 1e-9;

/* Solve Ax = b for symmetric A via pivoted LDLT with one refinement step.
 * Throws SingularSystemError (with the condition estimate) when A is singular
 * to working precision. */
Vec solve_symmetric(const Mat& A, const Vec& b);

/* Moore-Penrose pseudo-inverse via SVD; singular values <= tol*sigma_max are
 * treated as zero. The zero matrix maps to the zero matrix. */
CMat pseudo_inverse(const CMat& A, double tol = kSvdTol);
Mat pseudo_inverse(const Mat& A, double tol = kSvdTol);

/* Orthonormal basis (columns) of the null space of A: the right singular
 * vectors with sigma_i <= tol*sigma_max. Full-rank square input yields an
 * empty (cols x 0) result. */
Mat svd_null_basis(const Mat& A, double tol = kSvdTol);

/* Number of singular values > tol*sigma_max. */
int numeric_rank(const Mat& A, double tol = kSvdTol);

/* 2-norm condition estimate sigma_max/sigma_min (inf when singular). */
double condition_estimate(const Mat& A);

}
