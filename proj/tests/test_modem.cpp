#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "cisim/errors.hpp"
#include "cisim/modem.hpp"
#include "cisim/rng.hpp"

using namespace cisim;

namespace {

struct AxisEntry {
  int level;  /* unnormalized odd level */
  int code;   /* gray code, bits_per_axis wide */
};

const std::vector<AxisEntry>& axis_table(int order) {
  static const std::vector<AxisEntry> qpsk{{-1, 0b0}, {1, 0b1}};
  static const std::vector<AxisEntry> qam16{{-3, 0b00}, {-1, 0b01}, {1, 0b11}, {3, 0b10}};
  static const std::vector<AxisEntry> qam64{{-7, 0b000}, {-5, 0b001}, {-3, 0b011}, {-1, 0b010},
                                            {1, 0b110},  {3, 0b111}, {5, 0b101},  {7, 0b100}};
  if (order == 4) return qpsk;
  if (order == 16) return qam16;
  return qam64;
}

double norm_of(int order) {
  if (order == 4) return std::sqrt(2.0);
  if (order == 16) return std::sqrt(10.0);
  return std::sqrt(42.0);
}

std::vector<std::uint8_t> code_bits(int code, int nbits) {
  std::vector<std::uint8_t> bits;
  for (int i = nbits - 1; i >= 0; --i) bits.push_back(static_cast<std::uint8_t>((code >> i) & 1));
  return bits;
}

cplx brute_force_detect(cplx z, const Constellation& c) {
  cplx best = c.points[0];
  double dist = std::numeric_limits<double>::infinity();
  for (cplx p : c.points) {
    double d = std::norm(z - p);
    if (d < dist) {
      dist = d;
      best = p;
    }
  }
  return best;
}

}

TEST_CASE("square constellations have unit energy and classical levels") {
  for (int order : {4, 16, 64}) {
    Constellation c = make_square_qam(order);
    CHECK(c.order == order);
    CHECK(c.bits_per_symbol == static_cast<int>(std::lround(std::log2(order))));
    CHECK(c.bits_per_axis * 2 == c.bits_per_symbol);

    double energy = 0.0;
    for (cplx p : c.points) energy += std::norm(p);
    CHECK(energy / c.points.size() == doctest::Approx(1.0).epsilon(1e-12));

    const auto& table = axis_table(order);
    REQUIRE(c.levels.size() == table.size());
    double norm = norm_of(order);
    for (std::size_t i = 0; i < table.size(); ++i) {
      CHECK(c.levels[i] == doctest::Approx(table[i].level / norm).epsilon(1e-12));
    }
    CHECK(c.max_level == doctest::Approx(table.back().level / norm).epsilon(1e-12));
  }
  CHECK_THROWS_AS(make_square_qam(8), ConfigError);
  CHECK_THROWS_AS(make_square_qam(2), ConfigError);
  CHECK_THROWS_AS(make_square_qam(0), ConfigError);
}

TEST_CASE("the bit map follows the per-axis reflected gray table") {
  for (int order : {4, 16, 64}) {
    Constellation c = make_square_qam(order);
    const auto& table = axis_table(order);
    double norm = norm_of(order);
    for (const auto& re : table) {
      for (const auto& im : table) {
        std::vector<std::uint8_t> bits = code_bits(re.code, c.bits_per_axis);
        auto imb = code_bits(im.code, c.bits_per_axis);
        bits.insert(bits.end(), imb.begin(), imb.end());

        CVec s = map_bits(bits, c);
        REQUIRE(s.size() == 1);
        CHECK(s(0).real() == doctest::Approx(re.level / norm).epsilon(1e-12));
        CHECK(s(0).imag() == doctest::Approx(im.level / norm).epsilon(1e-12));

        int v = (re.code << c.bits_per_axis) | im.code;
        CHECK(c.points[v] == s(0));

        Detection d = detect_symbol(s(0), 1.0, c);
        CHECK(d.symbol == s(0));
        CHECK(d.bits == bits);
      }
    }
  }
}

TEST_CASE("documented 16QAM corners map as expected") {
  Constellation c = make_square_qam(16);
  double n = std::sqrt(10.0);
  CVec s = map_bits({0, 0, 0, 0}, c);
  CHECK(s(0).real() == doctest::Approx(-3.0 / n));
  CHECK(s(0).imag() == doctest::Approx(-3.0 / n));
  s = map_bits({1, 0, 1, 0}, c);
  CHECK(s(0).real() == doctest::Approx(3.0 / n));
  CHECK(s(0).imag() == doctest::Approx(3.0 / n));
  s = map_bits({1, 1, 0, 1}, c);
  CHECK(s(0).real() == doctest::Approx(1.0 / n));
  CHECK(s(0).imag() == doctest::Approx(-1.0 / n));
}

TEST_CASE("multi-symbol bit strings map symbol by symbol") {
  Constellation c = make_square_qam(16);
  std::vector<std::uint8_t> bits{0, 0, 0, 0, 1, 0, 1, 0};
  CVec s = map_bits(bits, c);
  REQUIRE(s.size() == 2);
  CHECK(s(0) == c.points[0b0000]);
  CHECK(s(1) == c.points[0b1010]);
  CHECK_THROWS_AS(map_bits({0, 1, 0}, c), ConfigError);
}

TEST_CASE("detection inverts the map under scaling and outward pushes") {
  Rng rng(17);
  for (int order : {4, 16, 64}) {
    Constellation c = make_square_qam(order);
    for (int v = 0; v < order; ++v) {
      cplx p = c.points[v];
      double t = 2.37;
      CHECK(detect_symbol(t * p, t, c).symbol == p);

      /* Boundary components may be amplified beyond the grid without
       * changing the decision. */
      auto [re, im] = decompose_symbol(p);
      cplx pushed(std::abs(re) >= c.max_level - 1e-12 ? 1.8 * re : re,
                  std::abs(im) >= c.max_level - 1e-12 ? 1.8 * im : im);
      CHECK(detect_symbol(pushed, 1.0, c).symbol == p);
    }

    for (int rep = 0; rep < 300; ++rep) {
      cplx p = c.points[static_cast<int>(rng.next_double() * order)];
      cplx r = p + 0.3 * rng.next_cgaussian();
      CHECK(detect_symbol(r, 1.0, c).symbol == brute_force_detect(r, c));
    }
  }
  CHECK_THROWS_AS(detect_symbol(cplx(1.0, 0.0), 0.0, make_square_qam(16)), NumericalError);
  CHECK_THROWS_AS(detect_symbol(cplx(1.0, 0.0), -1.0, make_square_qam(16)), NumericalError);
}

TEST_CASE("components classify by their distance from the boundary") {
  Constellation c = make_square_qam(16);
  double n = std::sqrt(10.0);
  CVec s(3);
  s << cplx(3, 3) / n, cplx(1, 1) / n, cplx(3, 1) / n;
  auto mask = classify_components(s, c);
  REQUIRE(mask.size() == 6);
  CHECK(mask[0] == Component::Outer);
  CHECK(mask[1] == Component::Outer);
  CHECK(mask[2] == Component::Inner);
  CHECK(mask[3] == Component::Inner);
  CHECK(mask[4] == Component::Outer);
  CHECK(mask[5] == Component::Inner);

  Constellation q = make_square_qam(4);
  CVec qs(2);
  qs << q.points[0], q.points[3];
  for (Component comp : classify_components(qs, q)) CHECK(comp == Component::Outer);

  CVec bad(1);
  bad << cplx(0.5, 0.5);
  CHECK_THROWS_AS(classify_components(bad, c), ConfigError);
}

TEST_CASE("expansions interleave the axes and pair reciprocals") {
  Constellation c = make_square_qam(16);
  Rng rng(19);
  std::vector<std::uint8_t> bits(4 * 4);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_bit());
  CVec s = map_bits(bits, c);
  SymbolFrame f = build_expansion(s, c);

  REQUIRE(f.K() == 4);
  REQUIRE(f.s_E.size() == 8);
  for (int k = 0; k < 4; ++k) {
    CHECK(f.s_E(2 * k) == s(k).real());
    CHECK(f.s_E(2 * k + 1) == s(k).imag());
    CHECK(std::abs(f.s_hat(k) * s(k) - 1.0) <= 1e-14);
  }
  CHECK(f.mask == classify_components(s, c));
  CHECK(f.outer_count() == static_cast<int>(std::count(f.mask.begin(), f.mask.end(),
                                                        Component::Outer)));

  CVec sc = f.complex_expansion();
  for (int k = 0; k < 4; ++k) {
    CHECK(sc(2 * k) == cplx(s(k).real(), 0.0));
    CHECK(sc(2 * k + 1) == cplx(0.0, s(k).imag()));
  }

  CMat u = f.U();
  REQUIRE(u.rows() == 4);
  REQUIRE(u.cols() == 8);
  CHECK((u * sc - s).cwiseAbs().maxCoeff() <= 1e-15);
  cplx ip = (f.s_hat.transpose() * s).value();
  CHECK(ip.real() == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(std::abs(ip.imag()) <= 1e-13);

  CVec zero(1);
  zero << cplx(0.0, 0.0);
  CHECK_THROWS_AS(build_expansion(zero, c), ConfigError);
}
