#include "cisim/ci_core.hpp"

#include <cmath>
#include <limits>

#include "cisim/errors.hpp"
#include "cisim/numerics.hpp"
#include "cisim/qp.hpp"

namespace cisim {

namespace detail {

/* Entry (i, j) = conj(sc_i) B(i/2, j/2) sc_j: the 2K x 2K form obtained by
 * sandwiching a K x K kernel between the component expansion and U. */
CMat pair_quadratic_form(const CMat& B, const CVec& sc) {
  const auto n = sc.size();
  CMat T(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      T(i, j) = std::conj(sc(i)) * B(i / 2, j / 2) * sc(j);
    }
  }
  return T;
}

double hermitian_condition(const CMat& A) {
  Eigen::JacobiSVD<CMat> svd(A);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

}

Eigen::VectorXi outer_first_permutation(const std::vector<Component>& mask) {
  Eigen::VectorXi perm(mask.size());
  int r = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == Component::Outer) perm(r++) = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == Component::Inner) perm(r++) = static_cast<int>(i);
  }
  return perm;
}

Mat CiGeometry::F() const {
  Mat f = Mat::Zero(perm.size(), perm.size());
  for (Eigen::Index r = 0; r < perm.size(); ++r) f(r, perm(r)) = 1.0;
  return f;
}

double detection_scale(const Vec& omega, const std::vector<Component>& mask) {
  double t = std::numeric_limits<double>::infinity();
  bool any_inner = false;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == Component::Inner) {
      any_inner = true;
      t = std::min(t, omega(static_cast<Eigen::Index>(i)));
    }
  }
  return any_inner ? t : omega.minCoeff();
}

CiGeometry build_geometry(const CMat& H, const SymbolFrame& frame) {
  const auto K = H.rows();
  const auto Nt = H.cols();
  if (frame.K() != K) throw ConfigError("build_geometry: frame/channel size mismatch");
  if (K > Nt) throw ConfigError("build_geometry: requires K <= Nt");

  CMat G0 = H * H.adjoint();
  double cond = detail::hermitian_condition(G0);
  if (!(cond < 1e12)) {
    throw SingularSystemError("build_geometry: HH^H singular to working precision", cond);
  }
  CMat A = G0.ldlt().solve(CMat::Identity(K, K));

  CiGeometry g;
  g.frame = frame;
  g.T = detail::pair_quadratic_form(A, frame.complex_expansion());
  g.V = g.T.real();
  g.perm = outer_first_permutation(frame.mask);
  g.Vt.resize(2 * K, 2 * K);
  for (Eigen::Index r = 0; r < 2 * K; ++r) {
    for (Eigen::Index col = 0; col < 2 * K; ++col) g.Vt(r, col) = g.V(g.perm(r), g.perm(col));
  }
  g.outer = frame.outer_count();
  return g;
}

Precoder reconstruct_precoder(const CMat& H, const SymbolFrame& frame, const Vec& omega,
                              double p0) {
  if (!(p0 > 0.0)) throw ConfigError("reconstruct_precoder: p0 must be positive");
  const auto K = H.rows();
  if (omega.size() != 2 * K) throw ConfigError("reconstruct_precoder: omega length mismatch");

  CMat G0 = H * H.adjoint();
  double cond = detail::hermitian_condition(G0);
  if (!(cond < 1e12)) {
    throw SingularSystemError("reconstruct_precoder: HH^H singular to working precision", cond);
  }

  CVec sc = frame.complex_expansion();
  CVec v(K);
  for (Eigen::Index k = 0; k < K; ++k) v(k) = omega(2 * k) * sc(2 * k) + omega(2 * k + 1) * sc(2 * k + 1);

  Precoder p;
  p.x = H.adjoint() * G0.ldlt().solve(v);
  p.W = p.x * frame.s_hat.transpose() / static_cast<double>(K);
  p.rx_scale = detection_scale(omega, frame.mask);
  p.label = "CI";
  return p;
}

std::pair<ScalingSolution, Precoder> solve_ci(const CMat& H, const CVec& s,
                                              const Constellation& c, double p0,
                                              CiSolver solver, int iter_max) {
  if (!(p0 > 0.0)) throw ConfigError("solve_ci: p0 must be positive");
  if (H.rows() != s.size()) throw ConfigError("solve_ci: channel/symbol size mismatch");

  SymbolFrame frame = build_expansion(s, c);
  CiGeometry g = build_geometry(H, frame);

  double cond = condition_estimate(g.Vt);
  if (!(cond < 1e12)) {
    throw SingularSystemError("solve_ci: scaling form ill-conditioned", cond);
  }
  Mat Q = g.Vt.ldlt().solve(Mat::Identity(g.Vt.rows(), g.Vt.cols()));
  Q = 0.5 * (Q + Q.transpose()).eval();

  QpProblem prob{Q, g.outer, InverseMode::exact};
  QpSolution qs;
  switch (solver) {
    case CiSolver::active_set: qs = solve_active_set(prob, iter_max); break;
    case CiSolver::closed_form: qs = solve_closed_form_dual(qp_setup(prob)); break;
    case CiSolver::oracle: qs = solve_oracle(prob); break;
  }

  if (!(qs.objective > 0.0)) {
    throw NumericalError("solve_ci: nonpositive dual objective, cannot scale");
  }
  double delta0 = std::sqrt(qs.objective / (4.0 * p0));
  Vec omega_t = Q * qs.u / (2.0 * delta0);
  Vec omega(omega_t.size());
  for (Eigen::Index r = 0; r < omega_t.size(); ++r) omega(g.perm(r)) = omega_t(r);

  Precoder pre = reconstruct_precoder(H, frame, omega, p0);
  if (solver == CiSolver::closed_form) pre.label = "CI-CF";

  ScalingSolution sol;
  sol.omega = std::move(omega);
  sol.t = pre.rx_scale;
  sol.u = qs.u;
  sol.delta0 = delta0;
  sol.iterations = qs.iterations;
  return {std::move(sol), std::move(pre)};
}

}
