#include "cisim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>
#include <utility>

#include "cisim/baselines.hpp"
#include "cisim/ci_core.hpp"
#include "cisim/ci_overload.hpp"
#include "cisim/errors.hpp"
#include "cisim/precoder.hpp"

namespace cisim {

const char* scheme_label(Scheme s) {
  switch (s) {
    case Scheme::ZF: return "ZF";
    case Scheme::RZF: return "RZF";
    case Scheme::CI_Iterative: return "CI-Iterative";
    case Scheme::CI_CF: return "CI-CF";
    case Scheme::CI_Oracle: return "CI-Oracle";
  }
  return "?";
}

bool scheme_is_ci(Scheme s) {
  return s == Scheme::CI_Iterative || s == Scheme::CI_CF || s == Scheme::CI_Oracle;
}

double FeasibilityPoint::iteration_std_error() const {
  if (!slots) return 0.0;
  double n = static_cast<double>(slots);
  double m = static_cast<double>(iter_sum) / n;
  double m2 = static_cast<double>(iter_sq_sum) / n;
  return std::sqrt(std::max(m2 - m * m, 0.0) / n);
}

CMat draw_channel(int K, int Nt, Rng& rng) {
  if (K < 1 || Nt < 1) throw ConfigError("draw_channel: K and Nt must be >= 1");
  CMat H(K, Nt);
  for (int k = 0; k < K; ++k) {
    for (int t = 0; t < Nt; ++t) H(k, t) = rng.next_cgaussian();
  }
  return H;
}

namespace {

constexpr int kMaxRedraws = 32;
/* Channel substream key per (slot, redraw attempt); the stride exceeds the
 * redraw cap so keys never collide across slots. */
constexpr std::uint64_t kAttemptStride = 64;

CiSolver ci_solver_of(Scheme s) {
  switch (s) {
    case Scheme::CI_CF: return CiSolver::closed_form;
    case Scheme::CI_Oracle: return CiSolver::oracle;
    default: return CiSolver::active_set;
  }
}

std::vector<std::uint8_t> draw_bits(std::uint64_t seed, std::uint64_t trial, int count) {
  Rng rng = make_stream(seed, Stream::Bits, trial);
  std::vector<std::uint8_t> bits(count);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_bit());
  return bits;
}

std::pair<Precoder, SlotDiagnostics> build_precoder(const CMat& H, const CVec& s,
                                                    const Constellation& c, Scheme scheme,
                                                    double p0, double sigma2, int iter_max) {
  SlotDiagnostics diag;
  const bool overload = H.rows() > H.cols();
  if (scheme == Scheme::ZF) {
    if (overload) throw ConfigError("transmit_slot: ZF requires K <= Nt");
    return {zf_precode(H, s, p0), diag};
  }
  if (scheme == Scheme::RZF) {
    return {rzf_precode(H, s, p0, sigma2), diag};
  }
  if (!overload) {
    auto [sol, pre] = solve_ci(H, s, c, p0, ci_solver_of(scheme), iter_max);
    diag.iterations = sol.iterations;
    return {std::move(pre), diag};
  }
  auto [sol, pre] = solve_ci_overload(H, s, c, p0, ci_solver_of(scheme), iter_max);
  diag.iterations = sol.iterations;
  diag.feasible = sol.feasible;
  if (!sol.feasible) {
    diag.fallback = true;
    return {rzf_precode(H, s, p0, sigma2), diag};
  }
  return {std::move(pre), diag};
}

std::vector<std::uint8_t> detect_all(const CMat& H, const Precoder& pre, double sigma,
                                     Rng& noise_rng, const Constellation& c) {
  CVec rx = H * pre.x;
  std::vector<std::uint8_t> decoded;
  decoded.reserve(static_cast<std::size_t>(H.rows()) * c.bits_per_symbol);
  for (Eigen::Index k = 0; k < H.rows(); ++k) {
    cplx n = noise_rng.next_cgaussian();
    Detection det = detect_symbol(rx(k) + sigma * n, pre.rx_scale, c);
    decoded.insert(decoded.end(), det.bits.begin(), det.bits.end());
  }
  return decoded;
}

int resolve_threads(int threads, std::uint64_t trials) {
  int t = threads;
  if (t <= 0) {
    unsigned hw = std::thread::hardware_concurrency();
    t = hw ? static_cast<int>(hw) : 1;
  }
  if (static_cast<std::uint64_t>(t) > trials) t = static_cast<int>(trials);
  return std::max(t, 1);
}

/* Run body(first, last) on each worker's trial range; rethrows the first
 * (by worker index) captured exception after all workers join. */
template <typename Body>
void parallel_trials(std::uint64_t trials, int threads, const Body& body) {
  if (threads <= 1) {
    body(0, trials, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(threads);
  std::uint64_t chunk = (trials + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    std::uint64_t first = w * chunk;
    std::uint64_t last = std::min(trials, first + chunk);
    pool.emplace_back([&, w, first, last] {
      try {
        if (first < last) body(first, last, w);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs) {
    if (e) std::rethrow_exception(e);
  }
}

void validate_common(const SimConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (!(cfg.p0 > 0.0)) throw ConfigError("p0 must be positive");
  if (cfg.channel_reuse < 1) throw ConfigError("channel_reuse must be >= 1");
  if (cfg.iter_max < 1) throw ConfigError("iter_max must be >= 1");
  if (cfg.k_list.empty() || cfg.nt_list.empty()) throw ConfigError("K and Nt are required");
  for (int k : cfg.k_list) {
    if (k < 1) throw ConfigError("K entries must be >= 1");
  }
  for (int nt : cfg.nt_list) {
    if (nt < 1) throw ConfigError("Nt entries must be >= 1");
  }
}

[[noreturn]] void slot_exhausted(const char* op, std::uint64_t trial, int K, int Nt) {
  std::ostringstream msg;
  msg << op << ": slot " << trial << " (K=" << K << ", Nt=" << Nt << ") still failing after "
      << kMaxRedraws << " channel redraws";
  throw NumericalError(msg.str());
}

}

SlotResult transmit_slot(const CMat& H, const std::vector<std::uint8_t>& bits, Scheme scheme,
                         const Constellation& c, double p0, double sigma2, Rng& noise_rng,
                         int iter_max) {
  if (bits.size() != static_cast<std::size_t>(H.rows()) * c.bits_per_symbol) {
    throw ConfigError("transmit_slot: bit count must be K * bits_per_symbol");
  }
  CVec s = map_bits(bits, c);
  auto [pre, diag] = build_precoder(H, s, c, scheme, p0, sigma2, iter_max);
  SlotResult out;
  out.diag = diag;
  out.decoded = detect_all(H, pre, std::sqrt(sigma2), noise_rng, c);
  return out;
}

BerResult run_ber_sweep(const SimConfig& cfg) {
  validate_common(cfg);
  if (cfg.k_list.size() != 1 || cfg.nt_list.size() != 1) {
    throw ConfigError("ber sweep takes a single K and Nt");
  }
  if (cfg.schemes.empty()) throw ConfigError("schemes must not be empty");
  if (cfg.snr_db.empty()) throw ConfigError("snr_db must not be empty");
  for (double v : cfg.snr_db) {
    if (!std::isfinite(v)) throw ConfigError("snr_db entries must be finite");
  }

  const int K = cfg.k_list[0];
  const int Nt = cfg.nt_list[0];
  const bool overload = K > Nt;
  bool any_ci = false;
  bool any_rzf = false;
  for (Scheme s : cfg.schemes) {
    any_ci = any_ci || scheme_is_ci(s);
    any_rzf = any_rzf || s == Scheme::RZF;
    if (s == Scheme::ZF && overload) throw ConfigError("ZF requires K <= Nt");
  }
  const bool need_rzf = any_rzf || (overload && any_ci);

  const Constellation c = make_square_qam(cfg.order);
  const std::size_t S = cfg.schemes.size();
  const std::size_t R = cfg.snr_db.size();
  std::vector<double> sigma2(R);
  for (std::size_t r = 0; r < R; ++r) sigma2[r] = cfg.p0 * std::pow(10.0, -cfg.snr_db[r] / 10.0);

  auto blank_cells = [&] {
    std::vector<BerCell> cells(S * R);
    for (std::size_t si = 0; si < S; ++si) {
      for (std::size_t r = 0; r < R; ++r) {
        cells[si * R + r].scheme = cfg.schemes[si];
        cells[si * R + r].snr_db = cfg.snr_db[r];
      }
    }
    return cells;
  };

  auto run_trial = [&](std::uint64_t trial, std::vector<BerCell>& cells) {
    auto bits = draw_bits(cfg.seed, trial, K * c.bits_per_symbol);
    CVec s = map_bits(bits, c);

    struct Built {
      Precoder pre;
      SlotDiagnostics diag;
    };
    std::vector<Built> ci(S);
    Precoder zf;
    std::vector<Precoder> rzf(R);
    CMat H;

    const std::uint64_t base = (trial / cfg.channel_reuse) * kAttemptStride;
    bool built = false;
    for (int attempt = 0; attempt < kMaxRedraws && !built; ++attempt) {
      Rng ch = make_stream(cfg.seed, Stream::Channel, base + attempt);
      H = draw_channel(K, Nt, ch);
      try {
        for (std::size_t si = 0; si < S; ++si) {
          Scheme sch = cfg.schemes[si];
          if (sch == Scheme::ZF) {
            zf = zf_precode(H, s, cfg.p0);
          } else if (scheme_is_ci(sch)) {
            Built b;
            if (!overload) {
              auto [sol, pre] = solve_ci(H, s, c, cfg.p0, ci_solver_of(sch), cfg.iter_max);
              b.diag.iterations = sol.iterations;
              b.pre = std::move(pre);
            } else {
              auto [sol, pre] = solve_ci_overload(H, s, c, cfg.p0, ci_solver_of(sch), cfg.iter_max);
              b.diag.iterations = sol.iterations;
              b.diag.feasible = sol.feasible;
              b.diag.fallback = !sol.feasible;
              b.pre = std::move(pre);
            }
            ci[si] = std::move(b);
          }
        }
        if (need_rzf) {
          for (std::size_t r = 0; r < R; ++r) rzf[r] = rzf_precode(H, s, cfg.p0, sigma2[r]);
        }
        built = true;
      } catch (const NumericalError&) {
        /* measure-zero degenerate slot: redraw the channel */
      }
    }
    if (!built) slot_exhausted("run_ber_sweep", trial, K, Nt);

    for (std::size_t si = 0; si < S; ++si) {
      Scheme sch = cfg.schemes[si];
      for (std::size_t r = 0; r < R; ++r) {
        const Precoder* pre = nullptr;
        SlotDiagnostics diag;
        if (sch == Scheme::ZF) {
          pre = &zf;
        } else if (sch == Scheme::RZF) {
          pre = &rzf[r];
        } else {
          diag = ci[si].diag;
          pre = diag.fallback ? &rzf[r] : &ci[si].pre;
        }
        Rng noise = make_stream(cfg.seed, Stream::Noise, trial);
        auto decoded = detect_all(H, *pre, std::sqrt(sigma2[r]), noise, c);
        std::uint64_t errs = 0;
        for (std::size_t i = 0; i < bits.size(); ++i) errs += decoded[i] != bits[i];

        BerCell& cell = cells[si * R + r];
        cell.bit_errors += errs;
        cell.bits += bits.size();
        cell.slots += 1;
        if (scheme_is_ci(sch)) {
          cell.has_iterations = true;
          cell.iter_sum += static_cast<std::uint64_t>(diag.iterations);
          if (overload) {
            cell.has_feasibility = true;
            cell.feasible += diag.feasible ? 1 : 0;
            cell.fallback += diag.fallback ? 1 : 0;
          }
        }
      }
    }
  };

  const int threads = resolve_threads(cfg.threads, cfg.trials);
  std::vector<std::vector<BerCell>> partial(threads, blank_cells());
  parallel_trials(cfg.trials, threads, [&](std::uint64_t first, std::uint64_t last, int w) {
    for (std::uint64_t trial = first; trial < last; ++trial) run_trial(trial, partial[w]);
  });

  BerResult result;
  result.K = K;
  result.Nt = Nt;
  result.order = cfg.order;
  result.cells = blank_cells();
  for (const auto& cells : partial) {
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
      BerCell& to = result.cells[i];
      const BerCell& from = cells[i];
      to.bit_errors += from.bit_errors;
      to.bits += from.bits;
      to.iter_sum += from.iter_sum;
      to.feasible += from.feasible;
      to.fallback += from.fallback;
      to.slots += from.slots;
      to.has_iterations = to.has_iterations || from.has_iterations;
      to.has_feasibility = to.has_feasibility || from.has_feasibility;
    }
  }
  return result;
}

FeasibilityResult run_feasibility_stats(const SimConfig& cfg) {
  validate_common(cfg);
  if (cfg.nt_list.size() != 1 && cfg.nt_list.size() != cfg.k_list.size()) {
    throw ConfigError("Nt must be scalar or match K's length");
  }
  const Constellation c = make_square_qam(cfg.order);

  FeasibilityResult result;
  result.order = cfg.order;
  const int threads = resolve_threads(cfg.threads, cfg.trials);

  for (std::size_t i = 0; i < cfg.k_list.size(); ++i) {
    const int K = cfg.k_list[i];
    const int Nt = cfg.nt_list.size() == 1 ? cfg.nt_list[0] : cfg.nt_list[i];
    const bool overload = K > Nt;

    std::vector<FeasibilityPoint> partial(threads);
    parallel_trials(cfg.trials, threads, [&](std::uint64_t first, std::uint64_t last, int w) {
      FeasibilityPoint& acc = partial[w];
      for (std::uint64_t trial = first; trial < last; ++trial) {
        auto bits = draw_bits(cfg.seed, trial, K * c.bits_per_symbol);
        CVec s = map_bits(bits, c);
        const std::uint64_t base = (trial / cfg.channel_reuse) * kAttemptStride;
        bool done = false;
        for (int attempt = 0; attempt < kMaxRedraws && !done; ++attempt) {
          Rng ch = make_stream(cfg.seed, Stream::Channel, base + attempt);
          CMat H = draw_channel(K, Nt, ch);
          try {
            int iters = 0;
            bool feasible = true;
            if (overload) {
              auto [sol, pre] = solve_ci_overload(H, s, c, cfg.p0, CiSolver::active_set,
                                                  cfg.iter_max);
              iters = sol.iterations;
              feasible = sol.feasible;
            } else {
              auto [sol, pre] = solve_ci(H, s, c, cfg.p0, CiSolver::active_set, cfg.iter_max);
              iters = sol.iterations;
            }
            acc.slots += 1;
            acc.feasible += feasible ? 1 : 0;
            acc.iter_sum += static_cast<std::uint64_t>(iters);
            acc.iter_sq_sum += static_cast<std::uint64_t>(iters) * iters;
            done = true;
          } catch (const NumericalError&) {
          }
        }
        if (!done) slot_exhausted("run_feasibility_stats", trial, K, Nt);
      }
    });

    FeasibilityPoint point;
    point.K = K;
    point.Nt = Nt;
    for (const auto& p : partial) {
      point.slots += p.slots;
      point.feasible += p.feasible;
      point.iter_sum += p.iter_sum;
      point.iter_sq_sum += p.iter_sq_sum;
    }
    result.points.push_back(point);
  }
  return result;
}

}
