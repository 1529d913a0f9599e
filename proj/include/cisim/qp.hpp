#pragma once

#include <optional>
#include <vector>

#include "cisim/types.hpp"

namespace cisim {

enum class InverseMode { exact, pseudo };

/* min u'Qu  s.t.  1'u = 1,  u_n >= 0 for the first N entries.
 * N = 0 is valid (no sign constraints; the minimizer is a/c directly).
 * pseudo mode forms every Q^{-1}-like quantity from the Moore-Penrose Q^+,
 * which restricts the dual to range(Q); needed when Q is rank deficient. */
struct QpProblem {
  Mat Q;
  int N = 0;
  InverseMode inverse_mode = InverseMode::exact;
};

struct QpWorkspace {
  Mat Q; /* symmetrized */
  int N = 0;
  InverseMode mode = InverseMode::exact;
  Vec a;    /* Q^{-1} 1 */
  double c; /* 1'a */
  Mat Phi;  /* a a' / c */
  Mat G;    /* leading M x N block of Q^{-1} - Phi */

  int M() const { return static_cast<int>(Q.rows()); }
  auto a_A() const { return a.head(N); }
  auto G_A() const { return G.topRows(N); }
};

struct QpSolution {
  Vec u;
  std::vector<int> active; /* support of q_E (0-based indices into the first N) */
  Vec q;                   /* multipliers, length N, zero off the support */
  int iterations = 0;
  double objective = 0.0;
};

QpWorkspace qp_setup(const QpProblem& p);

/* Active-set search (ZF shortcut, grow by most-negative dual entry, accept on
 * nonnegative multipliers, backtrack through per-level choice counters). */
QpSolution solve_active_set(const QpProblem& p, int iter_max = 100);
QpSolution solve_active_set(const QpWorkspace& w, int iter_max = 100);

/* Single-active-constraint closed form: u = a/c when min(a_A) >= 0, otherwise
 * u = (e*a - d*g_k)/(c*e) with d = a_A(k) the most negative entry and
 * e = G_A(k,k). Sub-optimal by construction. */
QpSolution solve_closed_form_dual(const QpWorkspace& w);

/* Brute-force enumeration over all 2^N active subsets; requires N <= 16. */
QpSolution solve_oracle(const QpProblem& p);

}
