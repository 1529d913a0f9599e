#pragma once

#include <utility>

#include "cisim/ci_core.hpp"
#include "cisim/modem.hpp"
#include "cisim/precoder.hpp"
#include "cisim/types.hpp"

namespace cisim {

/* Geometry for K > Nt: channel inversion is replaced by the pseudo-inverse,
 * which is only consistent on scalings lying in the null space of the real
 * stack P_E; D spans that null space and Y carries the power form on it. */
struct OverloadGeometry {
  CMat P;               /* K x 2K, [HH^H (HH^H)^+ - I] U diag(s_E) */
  Mat P_E;              /* [Re P; Im P], 2K x 2K */
  Mat D;                /* 2K x 2Nt orthonormal null basis of P_E */
  CMat X;               /* D' diag(s_E^H) U^H (HH^H)^+ U diag(s_E) D */
  Mat Y;                /* Re{X} */
  CMat Gp;              /* cached (HH^H)^+ */
  Eigen::VectorXi perm; /* outer-first reordering, as in the K <= Nt case */
  SymbolFrame frame;
  int outer = 0;

  int K() const { return frame.K(); }
};

OverloadGeometry build_overload_geometry(const CMat& H, const SymbolFrame& frame);

struct OverloadSolution {
  Vec beta;             /* null-space weights, length 2Nt */
  Vec omega;            /* D beta, original component order */
  double t = 0;         /* min over all 2K entries of omega */
  bool feasible = false;
  Vec u;                /* dual vector in the reordered space */
  double delta0 = 0;
  int iterations = 0;
};

std::pair<OverloadSolution, Precoder> solve_ci_overload(const CMat& H, const CVec& s,
                                                        const Constellation& c, double p0,
                                                        CiSolver solver, int iter_max = 100);

/* True iff every entry of omega is strictly positive and all inner entries
 * agree to 1e-6 relative; an infeasible slot cannot carry K streams. */
bool check_feasibility(const Vec& omega, const SymbolFrame& frame);

namespace detail {
/* The same pipeline without the K > Nt guard. For K <= Nt the consistency
 * matrix vanishes, D spans all of R^{2K}, and the result matches solve_ci. */
OverloadGeometry build_overload_geometry_any(const CMat& H, const SymbolFrame& frame);
std::pair<OverloadSolution, Precoder> solve_ci_overload_any(const CMat& H, const CVec& s,
                                                            const Constellation& c, double p0,
                                                            CiSolver solver, int iter_max);
}

}
