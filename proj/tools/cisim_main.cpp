#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cisim/ci_core.hpp"
#include "cisim/ci_overload.hpp"
#include "cisim/config.hpp"
#include "cisim/emit.hpp"
#include "cisim/errors.hpp"
#include "cisim/modem.hpp"
#include "cisim/sim.hpp"
#include "cisim/version.hpp"

namespace {

using namespace cisim;

/* Re-solves every slot of the configured experiment with the active-set path
 * and checks the optimality certificate on the reconstructed precoder. */
int run_verify(const ExperimentSpec& spec) {
  const SimConfig& cfg = spec.sim;
  const int K = cfg.k_list[0];
  const int Nt = cfg.nt_list[0];
  const bool overload = K > Nt;
  const Constellation c = make_square_qam(cfg.order);

  double max_consistency = 0.0;
  double max_power = 0.0;
  double max_inner_spread = 0.0;
  double max_dual = 0.0;
  std::uint64_t outer_violations = 0;
  std::uint64_t feasible = 0;
  std::uint64_t slots = 0;

  for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
    Rng bit_rng = make_stream(cfg.seed, Stream::Bits, trial);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(K) * c.bits_per_symbol);
    for (auto& b : bits) b = static_cast<std::uint8_t>(bit_rng.next_bit());
    CVec s = map_bits(bits, c);
    SymbolFrame frame = build_expansion(s, c);
    CVec sc = frame.complex_expansion();

    bool done = false;
    for (int attempt = 0; attempt < 32 && !done; ++attempt) {
      Rng ch = make_stream(cfg.seed, Stream::Channel,
                           (trial / cfg.channel_reuse) * 64 + attempt);
      CMat H = draw_channel(K, Nt, ch);
      try {
        Vec omega;
        Vec u;
        double t = 0.0;
        CVec x;
        bool slot_feasible = true;
        bool degenerate = false;
        if (overload) {
          auto [sol, pre] = solve_ci_overload(H, s, c, cfg.p0, CiSolver::active_set,
                                              cfg.iter_max);
          omega = sol.omega;
          u = sol.u;
          t = sol.t;
          x = pre.x;
          slot_feasible = sol.feasible;
          degenerate = sol.delta0 == 0.0; /* zero dual optimum: no precoder exists */
        } else {
          auto [sol, pre] = solve_ci(H, s, c, cfg.p0, CiSolver::active_set, cfg.iter_max);
          omega = sol.omega;
          u = sol.u;
          t = sol.t;
          x = pre.x;
        }

        max_dual = std::max(max_dual, std::abs(u.sum() - 1.0));
        if (!degenerate) {
          CVec target(K);
          for (int k = 0; k < K; ++k) {
            target(k) = omega(2 * k) * sc(2 * k) + omega(2 * k + 1) * sc(2 * k + 1);
          }
          double scale = std::max(1.0, target.cwiseAbs().maxCoeff());
          max_consistency =
              std::max(max_consistency, (H * x - target).cwiseAbs().maxCoeff() / scale);
          max_power = std::max(max_power, std::abs(x.squaredNorm() - cfg.p0) / cfg.p0);
        }

        if (slot_feasible) {
          ++feasible;
          double inner_lo = std::numeric_limits<double>::infinity();
          double inner_hi = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < frame.mask.size(); ++i) {
            double w = omega(static_cast<Eigen::Index>(i));
            if (frame.mask[i] == Component::Inner) {
              inner_lo = std::min(inner_lo, w);
              inner_hi = std::max(inner_hi, w);
            } else if (w < t - 1e-9) {
              ++outer_violations;
            }
          }
          if (inner_hi >= inner_lo) {
            max_inner_spread =
                std::max(max_inner_spread, (inner_hi - inner_lo) / std::max(1.0, inner_hi));
          }
        }
        ++slots;
        done = true;
      } catch (const NumericalError&) {
      }
    }
    if (!done) {
      std::cerr << "verify: slot " << trial << " still failing after 32 channel redraws\n";
      return 2;
    }
  }

  const double inner_tol = overload ? 1e-6 : 1e-8;
  bool pass = max_consistency <= 1e-8 && max_power <= 1e-8 && max_inner_spread <= inner_tol &&
              max_dual <= 1e-10 && outer_violations == 0;
  std::cout << "verify: " << slots << " slots, K=" << K << ", Nt=" << Nt
            << ", order=" << cfg.order << "\n"
            << "  feasible slots:        " << feasible << "\n"
            << "  max |HWs - target|:    " << max_consistency << " (tol 1e-8, relative)\n"
            << "  max power error:       " << max_power << " (tol 1e-8, relative)\n"
            << "  max inner spread:      " << max_inner_spread << " (normalized, tol " << inner_tol
            << ")\n"
            << "  max |1'u - 1|:         " << max_dual << " (tol 1e-10)\n"
            << "  outer-below-t slots:   " << outer_violations << "\n"
            << (pass ? "verify: PASS\n" : "verify: FAIL\n");
  return pass ? 0 : 2;
}

int run(const ExperimentSpec& spec) {
  if (spec.mode == RunMode::verify) return run_verify(spec);

  std::vector<std::string> written;
  if (spec.mode == RunMode::ber_sweep) {
    BerResult r = run_ber_sweep(spec.sim);
    written = emit_results(r, spec);
  } else {
    FeasibilityResult r = run_feasibility_stats(spec.sim);
    written = emit_results(r, spec);
  }
  for (const auto& path : written) std::cout << "wrote " << path << "\n";
  return 0;
}

}

int main(int argc, char** argv) {
  CLI::App app{"constructive-interference symbol-level precoding simulator"};
  app.set_version_flag("--version", std::string(cisim::kVersion));
  std::string config_path;
  std::string mode_str;
  std::string out_path;
  std::string format_str;
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--config", config_path, "experiment config file")->required();
  auto* mode_opt = app.add_option("--mode", mode_str,
                                  "override mode (ber_sweep, feasibility, iterations, verify)");
  auto* seed_opt = app.add_option("--seed", seed, "override RNG seed");
  auto* out_opt = app.add_option("--out", out_path, "override output path");
  auto* fmt_opt = app.add_option("--format", format_str, "override output format (csv, json)");
  auto* thr_opt = app.add_option("--threads", threads, "override worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw cisim::ConfigError("cannot read config file '" + config_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    cisim::ExperimentSpec spec = cisim::parse_config(buf.str());
    if (mode_opt->count()) spec.mode = cisim::parse_mode(mode_str);
    if (seed_opt->count()) spec.sim.seed = seed;
    if (out_opt->count()) spec.out = out_path;
    if (fmt_opt->count()) spec.format = cisim::parse_format(format_str);
    if (thr_opt->count()) spec.sim.threads = threads;
    cisim::validate(spec);
    return run(spec);
  } catch (const cisim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const cisim::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
