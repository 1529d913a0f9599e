#include "cisim/modem.hpp"

#include <algorithm>
#include <cmath>

#include "cisim/errors.hpp"

namespace cisim {

namespace {

int gray_encode(int rank) { return rank ^ (rank >> 1); }

int gray_decode(int code) {
  int rank = 0;
  for (; code; code >>= 1) rank ^= code;
  return rank;
}

int axis_bits_to_rank(const std::vector<std::uint8_t>& bits, std::size_t off, int nbits) {
  int code = 0;
  for (int i = 0; i < nbits; ++i) code = (code << 1) | bits[off + i];
  return gray_decode(code);
}

void rank_to_axis_bits(int rank, int nbits, std::vector<std::uint8_t>& out) {
  int code = gray_encode(rank);
  for (int i = nbits - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((code >> i) & 1));
}

int nearest_level_rank(double x, const Constellation& c) {
  /* Levels are uniformly spaced; rounding the affine index is the exact
   * minimum-distance decision on one axis. */
  double step = c.levels[1] - c.levels[0];
  double idx = std::round((x - c.levels[0]) / step);
  int q = static_cast<int>(c.levels.size());
  return std::clamp(static_cast<int>(idx), 0, q - 1);
}

}

Constellation make_square_qam(int order) {
  if (order != 4 && order != 16 && order != 64) {
    throw ConfigError("make_square_qam: unsupported order " + std::to_string(order));
  }
  Constellation c;
  c.order = order;
  int q = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
  c.bits_per_symbol = static_cast<int>(std::lround(std::log2(static_cast<double>(order))));
  c.bits_per_axis = c.bits_per_symbol / 2;

  /* Unit average energy: E|s|^2 = 2 * mean(level^2) = 1 with the classical
   * normalizers sqrt(2), sqrt(10), sqrt(42). */
  double norm = std::sqrt(2.0 * (q * q - 1.0) / 3.0);
  c.levels.resize(q);
  for (int i = 0; i < q; ++i) c.levels[i] = (2 * i - (q - 1)) / norm;
  c.max_level = c.levels.back();

  c.points.resize(order);
  for (int v = 0; v < order; ++v) {
    int re_code = v >> c.bits_per_axis;
    int im_code = v & ((1 << c.bits_per_axis) - 1);
    c.points[v] = cplx(c.levels[gray_decode(re_code)], c.levels[gray_decode(im_code)]);
  }
  return c;
}

int SymbolFrame::outer_count() const {
  return static_cast<int>(std::count(mask.begin(), mask.end(), Component::Outer));
}

CVec SymbolFrame::complex_expansion() const {
  CVec sc(s_E.size());
  for (int k = 0; k < K(); ++k) {
    sc(2 * k) = cplx(s_E(2 * k), 0.0);
    sc(2 * k + 1) = cplx(0.0, s_E(2 * k + 1));
  }
  return sc;
}

CMat SymbolFrame::U() const {
  CMat u = CMat::Zero(K(), 2 * K());
  for (int k = 0; k < K(); ++k) {
    u(k, 2 * k) = 1.0;
    u(k, 2 * k + 1) = 1.0;
  }
  return u;
}

CVec map_bits(const std::vector<std::uint8_t>& bits, const Constellation& c) {
  if (bits.size() % static_cast<std::size_t>(c.bits_per_symbol) != 0) {
    throw ConfigError("map_bits: bit count not a multiple of bits per symbol");
  }
  std::size_t n = bits.size() / c.bits_per_symbol;
  CVec s(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t off = k * c.bits_per_symbol;
    int re_rank = axis_bits_to_rank(bits, off, c.bits_per_axis);
    int im_rank = axis_bits_to_rank(bits, off + c.bits_per_axis, c.bits_per_axis);
    s(k) = cplx(c.levels[re_rank], c.levels[im_rank]);
  }
  return s;
}

std::pair<double, double> decompose_symbol(cplx s) { return {s.real(), s.imag()}; }

std::vector<Component> classify_components(const CVec& s, const Constellation& c) {
  std::vector<Component> mask(2 * s.size());
  for (int k = 0; k < s.size(); ++k) {
    auto [re, im] = decompose_symbol(s(k));
    double lre = c.levels[nearest_level_rank(re, c)];
    double lim = c.levels[nearest_level_rank(im, c)];
    if (std::abs(re - lre) > 1e-9 || std::abs(im - lim) > 1e-9) {
      throw ConfigError("classify_components: symbol not in constellation");
    }
    mask[2 * k] = std::abs(lre) >= c.max_level - 1e-12 ? Component::Outer : Component::Inner;
    mask[2 * k + 1] = std::abs(lim) >= c.max_level - 1e-12 ? Component::Outer : Component::Inner;
  }
  return mask;
}

SymbolFrame build_expansion(const CVec& s, const Constellation& c) {
  SymbolFrame f;
  f.s = s;
  f.s_E.resize(2 * s.size());
  f.s_hat.resize(s.size());
  for (int k = 0; k < s.size(); ++k) {
    if (s(k) == cplx(0.0, 0.0)) throw ConfigError("build_expansion: zero symbol");
    f.s_E(2 * k) = s(k).real();
    f.s_E(2 * k + 1) = s(k).imag();
    f.s_hat(k) = 1.0 / s(k);
  }
  f.mask = classify_components(s, c);
  return f;
}

Detection detect_symbol(cplx r, double scale, const Constellation& c) {
  if (!(scale > 0.0)) throw NumericalError("detect_symbol: non-positive scale");
  cplx z = r / scale;
  int re_rank = nearest_level_rank(z.real(), c);
  int im_rank = nearest_level_rank(z.imag(), c);
  Detection d;
  d.symbol = cplx(c.levels[re_rank], c.levels[im_rank]);
  d.bits.reserve(c.bits_per_symbol);
  rank_to_axis_bits(re_rank, c.bits_per_axis, d.bits);
  rank_to_axis_bits(im_rank, c.bits_per_axis, d.bits);
  return d;
}

}
