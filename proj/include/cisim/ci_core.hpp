#pragma once

#include <utility>

#include "cisim/modem.hpp"
#include "cisim/precoder.hpp"
#include "cisim/types.hpp"

namespace cisim {

enum class CiSolver { active_set, closed_form, oracle };

/* Outer components first (ascending original index), then inner components
 * (ascending); perm(r) is the original index placed at reordered row r. */
Eigen::VectorXi outer_first_permutation(const std::vector<Component>& mask);

namespace detail {
/* diag(sc^H) U^H B U diag(sc) for a K x K kernel B. */
CMat pair_quadratic_form(const CMat& B, const CVec& sc);
double hermitian_condition(const CMat& A);
}

/* Geometry of the scaling problem for K <= Nt: the quadratic form tying the
 * per-component scalings to transmit power, plus the reordering that moves
 * boundary (outer) components in front of the sign-pinned (inner) ones. */
struct CiGeometry {
  CMat T;                    /* 2K x 2K, diag(s_E^H) U^H (HH^H)^{-1} U diag(s_E) */
  Mat V;                     /* Re{T}, symmetric PSD */
  Eigen::VectorXi perm;      /* reordered row r takes original index perm(r) */
  Mat Vt;                    /* F V F', outer block leading */
  SymbolFrame frame;
  int outer = 0;             /* number of outer components */

  int K() const { return frame.K(); }
  Mat F() const; /* explicit permutation matrix, F(r, perm(r)) = 1 */
};

CiGeometry build_geometry(const CMat& H, const SymbolFrame& frame);

/* The per-component scalings (original s_E order), the common inner scale t,
 * and the dual certificate that produced them. */
struct ScalingSolution {
  Vec omega;          /* length 2K */
  double t = 0;
  Vec u;              /* dual vector in the reordered space */
  double delta0 = 0;  /* positive multiplier mapping u to omega */
  int iterations = 0;
};

std::pair<ScalingSolution, Precoder> solve_ci(const CMat& H, const CVec& s,
                                              const Constellation& c, double p0,
                                              CiSolver solver, int iter_max = 100);

/* W = (1/K) H^H (HH^H)^{-1} U diag(omega) s_E s_hat'; the returned rx_scale is
 * the inner-component scale implied by omega. */
Precoder reconstruct_precoder(const CMat& H, const SymbolFrame& frame, const Vec& omega,
                              double p0);

/* min over inner entries of omega, or over all entries when every component
 * is outer (QPSK). */
double detection_scale(const Vec& omega, const std::vector<Component>& mask);

}
