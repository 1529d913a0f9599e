#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cisim/modem.hpp"
#include "cisim/rng.hpp"
#include "cisim/types.hpp"

namespace cisim {

enum class Scheme { ZF, RZF, CI_Iterative, CI_CF, CI_Oracle };

const char* scheme_label(Scheme s);
bool scheme_is_ci(Scheme s);

/* One experiment. k_list/nt_list are single-entry for BER sweeps; the
 * feasibility/iteration sweeps walk them pairwise (nt_list of length one is
 * broadcast). snr_db is per-antenna transmit SNR: sigma^2 = p0 10^(-snr/10). */
struct SimConfig {
  std::vector<int> k_list{1};
  std::vector<int> nt_list{1};
  int order = 16;
  double p0 = 1.0;
  std::vector<double> snr_db;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  std::vector<Scheme> schemes;
  std::uint64_t channel_reuse = 1;
  int iter_max = 100;
  int threads = 0; /* 0 = hardware concurrency */
};

struct BerCell {
  Scheme scheme{};
  double snr_db = 0;
  std::uint64_t bit_errors = 0;
  std::uint64_t bits = 0;
  std::uint64_t iter_sum = 0;
  std::uint64_t feasible = 0;
  std::uint64_t fallback = 0;
  std::uint64_t slots = 0;
  bool has_iterations = false;  /* CI schemes report mean iterations */
  bool has_feasibility = false; /* overloaded CI reports feasibility */

  double ber() const { return bits ? static_cast<double>(bit_errors) / bits : 0.0; }
  double std_error() const {
    if (!bits) return 0.0;
    double p = ber();
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(bits));
  }
  double mean_iterations() const {
    return slots ? static_cast<double>(iter_sum) / slots : 0.0;
  }
  double feasibility() const {
    return slots ? static_cast<double>(feasible) / slots : 0.0;
  }
};

struct BerResult {
  int K = 0;
  int Nt = 0;
  int order = 0;
  std::vector<BerCell> cells; /* scheme-major, then snr ascending as configured */
};

struct FeasibilityPoint {
  int K = 0;
  int Nt = 0;
  std::uint64_t slots = 0;
  std::uint64_t feasible = 0;
  std::uint64_t iter_sum = 0;
  std::uint64_t iter_sq_sum = 0;

  double feasibility() const { return slots ? static_cast<double>(feasible) / slots : 0.0; }
  double mean_iterations() const {
    return slots ? static_cast<double>(iter_sum) / slots : 0.0;
  }
  double iteration_std_error() const;
};

struct FeasibilityResult {
  int order = 0;
  std::vector<FeasibilityPoint> points;
};

CMat draw_channel(int K, int Nt, Rng& rng);

struct SlotDiagnostics {
  int iterations = 0;
  bool feasible = true;
  bool fallback = false;
};

struct SlotResult {
  std::vector<std::uint8_t> decoded;
  SlotDiagnostics diag;
};

/* One symbol slot end to end: bits -> symbols -> scheme precoder (overloaded
 * CI falls back to RZF when infeasible) -> AWGN -> genie-scaled detection. */
SlotResult transmit_slot(const CMat& H, const std::vector<std::uint8_t>& bits, Scheme scheme,
                         const Constellation& c, double p0, double sigma2, Rng& noise_rng,
                         int iter_max = 100);

/* Paired Monte Carlo: at a fixed seed every scheme and SNR point sees the
 * same channels, bits, and unit noise; accumulation is integer-exact so the
 * result is independent of thread count. */
BerResult run_ber_sweep(const SimConfig& cfg);

/* Per (K, Nt) point: fraction of feasible slots and iterative-solver
 * iteration statistics, using the CI active-set path. */
FeasibilityResult run_feasibility_stats(const SimConfig& cfg);

}
