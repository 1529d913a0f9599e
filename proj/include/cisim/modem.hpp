#pragma once

#include <cstdint>
#include <vector>

#include "cisim/types.hpp"

namespace cisim {

/* Outer components sit on the constellation boundary of their axis and may be
 * scaled beyond t; inner components are pinned to t exactly. */
enum class Component : std::uint8_t { Outer, Inner };

/* Unit-average-energy square QAM with a per-axis reflected Gray map.
 * points[v] is the symbol whose bit pattern is v, real-axis bits first. */
struct Constellation {
  int order = 0;
  int bits_per_axis = 0;
  int bits_per_symbol = 0;
  std::vector<double> levels; /* ascending, e.g. {-3,-1,1,3}/sqrt(10) */
  std::vector<cplx> points;
  double max_level = 0.0;
};

Constellation make_square_qam(int order);

/* One user symbol vector with its real-axis expansion and component mask. */
struct SymbolFrame {
  CVec s;                      /* length K */
  Vec s_E;                     /* length 2K: (Re s1, Im s1, Re s2, ...) */
  CVec s_hat;                  /* reciprocals 1/s_k */
  std::vector<Component> mask; /* length 2K, same interleaving as s_E */

  int K() const { return static_cast<int>(s.size()); }
  int outer_count() const;

  /* (Re s1, j*Im s1, Re s2, ...): the decomposition s_k = s_k^A + s_k^B with
   * s_k^A real and s_k^B purely imaginary, as the precoder algebra needs it. */
  CVec complex_expansion() const;

  /* The K x 2K pairing matrix U = I kron [1, 1]. */
  CMat U() const;
};

/* bits.size() must be a multiple of bits_per_symbol; one symbol per group. */
CVec map_bits(const std::vector<std::uint8_t>& bits, const Constellation& c);

/* (Re{s}, Im{s}): the symbol split along its two detection axes. */
std::pair<double, double> decompose_symbol(cplx s);

/* Per-component Outer/Inner labels; a component is Outer iff its amplitude
 * equals the maximal level of the constellation. */
std::vector<Component> classify_components(const CVec& s, const Constellation& c);

SymbolFrame build_expansion(const CVec& s, const Constellation& c);

struct Detection {
  cplx symbol;
  std::vector<std::uint8_t> bits;
};

/* Minimum-distance decision on r/scale; scale is the genie-provided slot
 * normalization (t for CI schemes, beta for ZF/RZF). */
Detection detect_symbol(cplx r, double scale, const Constellation& c);

}
