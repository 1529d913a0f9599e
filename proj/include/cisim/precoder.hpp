#pragma once

#include <string>

#include "cisim/types.hpp"

namespace cisim {

/* Symbol-level precoder output: the matrix, the transmit vector x = Ws, and
 * the genie receiver normalization the detector divides by (t for CI schemes,
 * beta for ZF/RZF). */
struct Precoder {
  CMat W;              /* Nt x K */
  CVec x;              /* length Nt */
  double rx_scale = 0; /* positive on success */
  std::string label;   /* ZF, RZF, CI, CI-CF */
};

}
