#include "cisim/ci_overload.hpp"

#include <cmath>
#include <limits>

#include "cisim/errors.hpp"
#include "cisim/numerics.hpp"
#include "cisim/qp.hpp"

namespace cisim {

bool check_feasibility(const Vec& omega, const SymbolFrame& frame) {
  if (omega.size() == 0 || omega.minCoeff() <= 0.0) return false;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < frame.mask.size(); ++i) {
    if (frame.mask[i] == Component::Inner) {
      double w = omega(static_cast<Eigen::Index>(i));
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
  }
  if (hi < lo) return true; /* no inner components: positivity is all there is */
  return hi - lo <= 1e-6 * hi;
}

namespace detail {

OverloadGeometry build_overload_geometry_any(const CMat& H, const SymbolFrame& frame) {
  const auto K = H.rows();
  const auto Nt = H.cols();
  if (frame.K() != K) throw ConfigError("build_overload_geometry: frame/channel size mismatch");

  OverloadGeometry g;
  g.frame = frame;

  CMat G0 = H * H.adjoint();
  g.Gp = pseudo_inverse(G0);
  CVec sc = frame.complex_expansion();
  CMat Udsc = CMat::Zero(K, 2 * K);
  for (Eigen::Index k = 0; k < K; ++k) {
    Udsc(k, 2 * k) = sc(2 * k);
    Udsc(k, 2 * k + 1) = sc(2 * k + 1);
  }
  CMat R = G0 * g.Gp - CMat::Identity(K, K);
  g.P = R * Udsc;
  g.P_E.resize(2 * K, 2 * K);
  g.P_E.topRows(K) = g.P.real();
  g.P_E.bottomRows(K) = g.P.imag();

  /* Full row rank makes the projector residual pure round-off and the stack
   * numerically zero; a relative SVD cut would misread that as full rank. */
  if (R.cwiseAbs().maxCoeff() <= 1e-10) {
    g.D = Mat::Identity(2 * K, 2 * K);
  } else {
    g.D = svd_null_basis(g.P_E);
  }
  const Eigen::Index expected = 2 * K - 2 * std::max<Eigen::Index>(0, K - Nt);
  if (g.D.cols() != expected) {
    throw NumericalError("build_overload_geometry: consistency rank anomaly, redraw channel");
  }

  CMat Dc = g.D.cast<cplx>();
  g.X = Dc.transpose() * pair_quadratic_form(g.Gp, sc) * Dc;
  g.Y = g.X.real();
  g.perm = outer_first_permutation(frame.mask);
  g.outer = frame.outer_count();
  return g;
}

std::pair<OverloadSolution, Precoder> solve_ci_overload_any(const CMat& H, const CVec& s,
                                                            const Constellation& c, double p0,
                                                            CiSolver solver, int iter_max) {
  if (!(p0 > 0.0)) throw ConfigError("solve_ci_overload: p0 must be positive");
  if (H.rows() != s.size()) throw ConfigError("solve_ci_overload: channel/symbol size mismatch");

  SymbolFrame frame = build_expansion(s, c);
  OverloadGeometry g = build_overload_geometry_any(H, frame);

  double cond = condition_estimate(g.Y);
  if (!(cond < 1e12)) {
    throw SingularSystemError("solve_ci_overload: power form ill-conditioned", cond);
  }
  Mat Yinv = g.Y.ldlt().solve(Mat::Identity(g.Y.rows(), g.Y.cols()));
  Yinv = 0.5 * (Yinv + Yinv.transpose()).eval();

  const auto M = g.D.rows();
  Mat FD(M, g.D.cols());
  for (Eigen::Index r = 0; r < M; ++r) FD.row(r) = g.D.row(g.perm(r));
  Mat Q = FD * Yinv * FD.transpose();
  Q = 0.5 * (Q + Q.transpose()).eval();

  QpProblem prob{Q, g.outer, InverseMode::pseudo};
  QpSolution qs;
  switch (solver) {
    case CiSolver::active_set: qs = solve_active_set(prob, iter_max); break;
    case CiSolver::closed_form: qs = solve_closed_form_dual(qp_setup(prob)); break;
    case CiSolver::oracle: qs = solve_oracle(prob); break;
  }

  const double obj_scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if (qs.objective < -1e-8 * obj_scale) {
    throw NumericalError("solve_ci_overload: negative dual objective");
  }
  if (qs.objective <= 1e-10 * obj_scale) {
    /* Zero dual optimum: a sign-feasible null vector of Q exists, so no
     * positive scaling does, and the slot cannot carry all K streams. */
    OverloadSolution sol;
    sol.beta = Vec::Zero(g.D.cols());
    sol.omega = Vec::Zero(M);
    sol.t = 0.0;
    sol.feasible = false;
    sol.u = qs.u;
    sol.delta0 = 0.0;
    sol.iterations = qs.iterations;
    Precoder pre;
    pre.x = CVec::Zero(H.cols());
    pre.W = CMat::Zero(H.cols(), g.K());
    pre.rx_scale = 0.0;
    pre.label = solver == CiSolver::closed_form ? "CI-CF" : "CI";
    return {std::move(sol), std::move(pre)};
  }
  double delta0 = std::sqrt(qs.objective / (4.0 * p0));
  Vec ft_u(M);
  for (Eigen::Index r = 0; r < M; ++r) ft_u(g.perm(r)) = qs.u(r);
  Vec beta = Yinv * (g.D.transpose() * ft_u) / (2.0 * delta0);
  Vec omega = g.D * beta;

  OverloadSolution sol;
  sol.beta = std::move(beta);
  sol.t = omega.minCoeff();
  sol.feasible = check_feasibility(omega, frame);
  sol.u = qs.u;
  sol.delta0 = delta0;
  sol.iterations = qs.iterations;

  CVec sc = frame.complex_expansion();
  CVec v(g.K());
  for (Eigen::Index k = 0; k < g.K(); ++k) {
    v(k) = omega(2 * k) * sc(2 * k) + omega(2 * k + 1) * sc(2 * k + 1);
  }
  Precoder pre;
  pre.x = H.adjoint() * (g.Gp * v);
  pre.W = pre.x * frame.s_hat.transpose() / static_cast<double>(g.K());
  pre.rx_scale = sol.t;
  pre.label = solver == CiSolver::closed_form ? "CI-CF" : "CI";

  sol.omega = std::move(omega);
  return {std::move(sol), std::move(pre)};
}

}

OverloadGeometry build_overload_geometry(const CMat& H, const SymbolFrame& frame) {
  if (H.rows() <= H.cols()) throw ConfigError("build_overload_geometry: requires K > Nt");
  return detail::build_overload_geometry_any(H, frame);
}

std::pair<OverloadSolution, Precoder> solve_ci_overload(const CMat& H, const CVec& s,
                                                        const Constellation& c, double p0,
                                                        CiSolver solver, int iter_max) {
  if (H.rows() <= H.cols()) throw ConfigError("solve_ci_overload: requires K > Nt");
  return detail::solve_ci_overload_any(H, s, c, p0, solver, iter_max);
}

}
