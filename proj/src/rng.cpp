#include "cisim/rng.hpp"

#include <cmath>
#include <numbers>

namespace cisim {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}

Rng::Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  /* Two mixing rounds separate the key components; +1 keeps stream 0 /
   * counter 0 from collapsing onto the raw seed. */
  std::uint64_t s = mix(seed + kGamma * (stream + 1));
  state_ = mix(s + kGamma * (counter + 1));
}

std::uint64_t Rng::next_u64() {
  state_ += kGamma;
  return mix(state_);
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::pair<double, double> Rng::gaussian_pair() {
  /* u1 in (0, 1] so the log is finite. */
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = next_double();
  double r = std::sqrt(-2.0 * std::log(u1));
  double th = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(th), r * std::sin(th)};
}

double Rng::next_gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  auto [g1, g2] = gaussian_pair();
  spare_ = g2;
  have_spare_ = true;
  return g1;
}

cplx Rng::next_cgaussian() {
  auto [g1, g2] = gaussian_pair();
  return cplx(g1, g2) * std::numbers::sqrt2 / 2.0;
}

}
