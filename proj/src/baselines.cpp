#include "cisim/baselines.hpp"

#include <cmath>

#include "cisim/ci_core.hpp"
#include "cisim/errors.hpp"

namespace cisim {

namespace {

Precoder normalize(const CMat& H, const CMat& Winv, const CVec& s, double p0,
                   const char* label) {
  CMat W0 = H.adjoint() * Winv;
  CVec v = W0 * s;
  double norm = v.norm();
  if (!(norm > 0.0) || !v.allFinite()) {
    throw NumericalError(std::string(label) + ": degenerate transmit vector");
  }
  double beta = std::sqrt(p0) / norm;
  Precoder p;
  p.x = beta * v;
  p.W = beta * W0;
  p.rx_scale = beta;
  p.label = label;
  return p;
}

}

Precoder zf_precode(const CMat& H, const CVec& s, double p0) {
  if (!(p0 > 0.0)) throw ConfigError("zf_precode: p0 must be positive");
  if (H.rows() > H.cols()) throw ConfigError("zf_precode: requires K <= Nt");
  if (H.rows() != s.size()) throw ConfigError("zf_precode: channel/symbol size mismatch");

  CMat G0 = H * H.adjoint();
  double cond = detail::hermitian_condition(G0);
  if (!(cond < 1e12)) {
    throw SingularSystemError("zf_precode: HH^H singular to working precision", cond);
  }
  return normalize(H, G0.ldlt().solve(CMat::Identity(H.rows(), H.rows())), s, p0, "ZF");
}

Precoder rzf_precode(const CMat& H, const CVec& s, double p0, double sigma2) {
  if (!(p0 > 0.0)) throw ConfigError("rzf_precode: p0 must be positive");
  if (sigma2 < 0.0) throw ConfigError("rzf_precode: sigma2 must be nonnegative");
  if (H.rows() != s.size()) throw ConfigError("rzf_precode: channel/symbol size mismatch");
  const auto K = H.rows();
  if (sigma2 == 0.0 && K > H.cols()) {
    throw NumericalError("rzf_precode: sigma2 = 0 with K > Nt is singular");
  }

  CMat M0 = H * H.adjoint() + (K * sigma2 / p0) * CMat::Identity(K, K);
  double cond = detail::hermitian_condition(M0);
  if (!(cond < 1e12)) {
    throw SingularSystemError("rzf_precode: loaded Gram matrix singular", cond);
  }
  return normalize(H, M0.ldlt().solve(CMat::Identity(K, K)), s, p0, "RZF");
}

}
