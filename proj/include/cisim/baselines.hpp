#pragma once

#include "cisim/precoder.hpp"
#include "cisim/types.hpp"

namespace cisim {

/* x = beta H^H (HH^H)^{-1} s, beta chosen so ||x||^2 = p0; rx_scale = beta. */
Precoder zf_precode(const CMat& H, const CVec& s, double p0);

/* x = beta H^H (HH^H + (K sigma2 / p0) I)^{-1} s; valid in both regimes for
 * sigma2 > 0. sigma2 = 0 with K > Nt reduces to singular ZF and is an error. */
Precoder rzf_precode(const CMat& H, const CVec& s, double p0, double sigma2);

}
