#pragma once

#include <cstdint>

#include "cisim/types.hpp"

namespace cisim {

/* SplitMix64 run in counter mode. A generator is keyed by (seed, stream,
 * counter); distinct keys give statistically independent substreams, which is
 * what keeps channel/bit/noise draws paired across schemes and makes parallel
 * trial execution order-independent. */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

  std::uint64_t next_u64();

  /* Uniform on [0, 1) with 53-bit resolution. */
  double next_double();

  /* Standard normal via Box-Muller; pairs are drawn eagerly and cached. */
  double next_gaussian();

  /* Circularly-symmetric complex Gaussian, unit variance (CN(0,1)). */
  cplx next_cgaussian();

  int next_bit() { return static_cast<int>(next_u64() >> 63); }

 private:
  std::pair<double, double> gaussian_pair();

  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/* Substream identifiers used by the simulator. */
enum class Stream : std::uint64_t { Channel = 0, Bits = 1, Noise = 2 };

inline Rng make_stream(std::uint64_t seed, Stream stream, std::uint64_t counter) {
  return Rng(seed, static_cast<std::uint64_t>(stream), counter);
}

}
