#include "cisim/qp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "cisim/errors.hpp"
#include "cisim/numerics.hpp"

namespace cisim {

namespace {

/* Exit feasibility for the sign-constrained dual entries. */
constexpr double kDualFeasTol = 1e-9;
/* Acceptance threshold for multiplier nonnegativity (q~ and oracle checks). */
constexpr double kMultTol = 1e-10;

void validate(const QpProblem& p) {
  const auto M = p.Q.rows();
  if (M == 0 || p.Q.cols() != M) throw NumericalError("qp: Q must be square and non-empty");
  if (!p.Q.allFinite()) throw NumericalError("qp: non-finite entries in Q");
  if (p.N < 0 || p.N > M) throw NumericalError("qp: N out of range");
  double scale = std::max(1.0, p.Q.cwiseAbs().maxCoeff());
  if ((p.Q - p.Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw NumericalError("qp: Q not symmetric to working precision");
  }
}

double objective_of(const Mat& Q, const Vec& u) { return u.dot(Q * u); }

/* u = a/c + (1/2) sum_i q~_i G_col(active_i); active entries are exactly zero
 * by construction of the Z system, so they are pinned. */
Vec recover_u(const QpWorkspace& w, const std::vector<int>& active, const Vec& qt) {
  Vec u = w.a / w.c;
  for (std::size_t i = 0; i < active.size(); ++i) u += 0.5 * qt(i) * w.G.col(active[i]);
  for (int n : active) u(n) = 0.0;
  return u;
}

QpSolution make_solution(const Mat& Q, int N, Vec u, std::vector<int> active, const Vec& qt,
                         int iterations) {
  QpSolution s;
  s.objective = objective_of(Q, u);
  s.u = std::move(u);
  s.q = Vec::Zero(N);
  for (std::size_t i = 0; i < active.size(); ++i) s.q(active[i]) = qt(i);
  s.active = std::move(active);
  s.iterations = iterations;
  return s;
}

/* Non-active indices ranked by current dual value ascending, ties by index. */
std::vector<int> rank_candidates(const Vec& u, int N, const std::vector<int>& active) {
  std::vector<char> used(N, 0);
  for (int n : active) used[n] = 1;
  std::vector<int> order;
  order.reserve(N - active.size());
  for (int n = 0; n < N; ++n) {
    if (!used[n]) order.push_back(n);
  }
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return u(i) < u(j); });
  return order;
}

/* Stationary point of u'Qu on {1'u = 1, u_pinned = 0}: the bordered KKT
 * system on the free coordinates. Rank-deficient blocks get the minimum-norm
 * solution; an inconsistent system (no stationary point) is reported instead
 * of solved. Multipliers of the pinned coordinates come from the full-space
 * stationarity rows, which determine them uniquely. */
struct PinnedSolve {
  Vec u;      /* length M, pinned entries exactly zero */
  Vec qt;     /* multipliers, one per pinned index in input order */
  double q0 = 0.0;
  bool consistent = false;
};

PinnedSolve solve_pinned(const Mat& Q, const std::vector<int>& pinned) {
  const auto M = Q.rows();
  std::vector<char> is_pinned(M, 0);
  for (int n : pinned) is_pinned[n] = 1;
  std::vector<int> free_idx;
  free_idx.reserve(M - pinned.size());
  for (int i = 0; i < M; ++i) {
    if (!is_pinned[i]) free_idx.push_back(i);
  }
  const auto f = static_cast<Eigen::Index>(free_idx.size());

  Mat kkt = Mat::Zero(f + 1, f + 1);
  for (Eigen::Index r = 0; r < f; ++r) {
    for (Eigen::Index col = 0; col < f; ++col) kkt(r, col) = 2.0 * Q(free_idx[r], free_idx[col]);
  }
  kkt.col(f).head(f).setOnes();
  kkt.row(f).head(f).setOnes();
  Vec rhs = Vec::Zero(f + 1);
  rhs(f) = 1.0;

  Eigen::CompleteOrthogonalDecomposition<Mat> cod(kkt);
  Vec x = cod.solve(rhs);

  PinnedSolve out;
  out.consistent =
      (kkt * x - rhs).lpNorm<Eigen::Infinity>() <= 1e-8 * (1.0 + x.lpNorm<Eigen::Infinity>());
  if (!out.consistent) return out;

  out.u = Vec::Zero(M);
  for (Eigen::Index r = 0; r < f; ++r) out.u(free_idx[r]) = x(r);
  out.q0 = x(f);
  Vec qu = Q * out.u;
  out.qt.resize(static_cast<Eigen::Index>(pinned.size()));
  for (std::size_t i = 0; i < pinned.size(); ++i) {
    out.qt(static_cast<Eigen::Index>(i)) = 2.0 * qu(pinned[i]) + out.q0;
  }
  return out;
}

/* Active-set search over pinned-coordinate subproblems for rank-deficient Q.
 * The workspace family u = a/c + Gq/2 spans only range(Q); the optimum of a
 * singular problem generally needs a null-space component (it changes no
 * objective term and no recovered beta, but it is what satisfies the sign
 * constraints), so each candidate set is solved in the full space instead. */
QpSolution solve_active_set_pseudo(const QpWorkspace& w, int iter_max) {
  const int N = w.N;

  PinnedSolve root = solve_pinned(w.Q, {});
  if (!root.consistent) {
    throw NumericalError("solve_active_set: stationarity system inconsistent at start");
  }
  if (N == 0 || root.u.head(N).minCoeff() >= -kDualFeasTol) {
    return make_solution(w.Q, N, std::move(root.u), {}, Vec(), 0);
  }

  struct Level {
    std::vector<int> order;
    std::size_t choice = 0;
  };
  std::vector<Level> stack;
  stack.push_back({rank_candidates(root.u, N, {}), 0});

  int iters = 0;
  double closest = root.u.head(N).minCoeff();

  auto exhausted = [&] {
    std::ostringstream msg;
    msg << "solve_active_set: backtracking exhausted after " << iters
        << " iterations (min dual entry reached " << closest << ")";
    return NumericalError(msg.str());
  };

  while (true) {
    if (stack.empty()) throw exhausted();
    if (stack.back().choice >= stack.back().order.size()) {
      stack.pop_back();
      if (stack.empty()) throw exhausted();
      ++stack.back().choice;
      continue;
    }

    std::vector<int> active;
    active.reserve(stack.size());
    for (const Level& lv : stack) active.push_back(lv.order[lv.choice]);

    if (++iters > iter_max) {
      std::ostringstream msg;
      msg << "solve_active_set: iteration limit " << iter_max << " exceeded (active set size "
          << active.size() << ", min dual entry reached " << closest << ")";
      throw NumericalError(msg.str());
    }

    PinnedSolve ps = solve_pinned(w.Q, active);
    if (!ps.consistent) {
      ++stack.back().choice;
      continue;
    }

    if (ps.qt.size() == 0 || ps.qt.minCoeff() >= -kMultTol) {
      double min_uA = ps.u.head(N).minCoeff();
      closest = std::max(closest, min_uA);
      if (min_uA >= -kDualFeasTol) {
        return make_solution(w.Q, N, std::move(ps.u), std::move(active), ps.qt, iters);
      }
      stack.push_back({rank_candidates(ps.u, N, active), 0});
    } else {
      int m = 0;
      ps.qt.minCoeff(&m);
      stack.resize(m + 1);
      ++stack.back().choice;
    }
  }
}

}

QpWorkspace qp_setup(const QpProblem& p) {
  validate(p);
  const int M = static_cast<int>(p.Q.rows());
  QpWorkspace w;
  w.Q = 0.5 * (p.Q + p.Q.transpose());
  w.N = p.N;
  w.mode = p.inverse_mode;

  Mat rhs(M, p.N + 1);
  rhs.col(0) = Vec::Ones(M);
  rhs.rightCols(p.N) = Mat::Identity(M, M).leftCols(p.N);

  Mat sol;
  if (p.inverse_mode == InverseMode::exact) {
    Eigen::FullPivLU<Mat> lu(w.Q);
    if (!lu.isInvertible()) {
      throw NumericalError("qp_setup: Q singular to working precision in exact mode; use pseudo mode");
    }
    sol = lu.solve(rhs);
    sol += lu.solve(rhs - w.Q * sol);
  } else {
    sol = pseudo_inverse(w.Q) * rhs;
  }

  w.a = sol.col(0);
  w.c = w.a.sum();
  if (std::abs(w.c) <= 1e-12 * (1.0 + w.a.lpNorm<1>())) {
    throw NumericalError("qp_setup: degenerate problem, 1'Q^{-1}1 vanishes");
  }
  w.Phi = w.a * w.a.transpose() / w.c;
  w.G = sol.rightCols(p.N) - w.a * w.a.head(p.N).transpose() / w.c;
  return w;
}

QpSolution solve_active_set(const QpProblem& p, int iter_max) {
  return solve_active_set(qp_setup(p), iter_max);
}

QpSolution solve_active_set(const QpWorkspace& w, int iter_max) {
  if (w.mode == InverseMode::pseudo) return solve_active_set_pseudo(w, iter_max);

  const int N = w.N;
  Vec u0 = w.a / w.c;

  /* ZF shortcut: the unconstrained stationary point is already sign feasible. */
  if (N == 0 || u0.head(N).minCoeff() >= 0.0) {
    return make_solution(w.Q, N, std::move(u0), {}, Vec(), 0);
  }

  struct Level {
    std::vector<int> order; /* candidate ranking frozen at level entry */
    std::size_t choice = 0;
  };
  std::vector<Level> stack;
  stack.push_back({rank_candidates(u0, N, {}), 0});

  int iters = 0;
  double closest = u0.head(N).minCoeff(); /* least-violating accepted state, for diagnostics */

  auto exhausted = [&] {
    std::ostringstream msg;
    msg << "solve_active_set: backtracking exhausted after " << iters
        << " iterations (min dual entry reached " << closest << ")";
    return NumericalError(msg.str());
  };

  while (true) {
    if (stack.empty()) throw exhausted();
    if (stack.back().choice >= stack.back().order.size()) {
      stack.pop_back();
      if (stack.empty()) throw exhausted();
      ++stack.back().choice;
      continue;
    }

    std::vector<int> active;
    active.reserve(stack.size());
    for (const Level& lv : stack) active.push_back(lv.order[lv.choice]);

    if (++iters > iter_max) {
      std::ostringstream msg;
      msg << "solve_active_set: iteration limit " << iter_max
          << " exceeded (active set size " << active.size() << ", min dual entry reached "
          << closest << ")";
      throw NumericalError(msg.str());
    }

    const auto I = static_cast<int>(active.size());
    Mat Z(I, I);
    Vec at(I);
    for (int r = 0; r < I; ++r) {
      at(r) = w.a(active[r]);
      for (int col = 0; col < I; ++col) Z(r, col) = w.G(active[r], active[col]);
    }

    Eigen::LDLT<Mat> ldlt(Z);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) {
      ++stack.back().choice; /* singular sub-block: treat as a rejected choice */
      continue;
    }
    Vec qt = ldlt.solve(-(2.0 / w.c) * at);

    if (qt.minCoeff() >= -kMultTol) {
      Vec u = recover_u(w, active, qt);
      double min_uA = u.head(N).minCoeff();
      closest = std::max(closest, min_uA);
      if (min_uA >= -kDualFeasTol) {
        return make_solution(w.Q, N, std::move(u), std::move(active), qt, iters);
      }
      stack.push_back({rank_candidates(u, N, active), 0});
    } else {
      int m = 0;
      qt.minCoeff(&m);
      /* Drop every level above the offending position and advance its choice
       * counter: the next-ranked candidate replaces it. */
      stack.resize(m + 1);
      ++stack.back().choice;
    }
  }
}

QpSolution solve_closed_form_dual(const QpWorkspace& w) {
  Vec u0 = w.a / w.c;
  if (w.N == 0) return make_solution(w.Q, w.N, std::move(u0), {}, Vec(), 0);

  int k = 0;
  double d = w.a_A().minCoeff(&k);
  if (d >= 0.0) return make_solution(w.Q, w.N, std::move(u0), {}, Vec(), 0);

  double e = w.G(k, k);
  double scale = std::max(1.0, w.G_A().cwiseAbs().maxCoeff());
  if (std::abs(e) <= 1e-14 * scale) {
    throw NumericalError("solve_closed_form_dual: vanishing pivot G_A(k,k)");
  }
  Vec u = (e * w.a - d * w.G.col(k)) / (w.c * e);
  u(k) = 0.0;
  Vec qt(1);
  qt(0) = -2.0 * d / (w.c * e);
  return make_solution(w.Q, w.N, std::move(u), {k}, qt, 0);
}

QpSolution solve_oracle(const QpProblem& p) {
  if (p.N > 16) throw NumericalError("solve_oracle: N > 16 not enumerable");
  validate(p);
  Mat Q = 0.5 * (p.Q + p.Q.transpose());
  const int N = p.N;

  bool found = false;
  QpSolution best;

  for (std::uint32_t mask = 0; mask < (1u << N); ++mask) {
    std::vector<int> S;
    for (int n = 0; n < N; ++n) {
      if (mask & (1u << n)) S.push_back(n);
    }

    PinnedSolve ps = solve_pinned(Q, S);
    if (!ps.consistent) continue;

    bool ok = ps.qt.size() == 0 || ps.qt.minCoeff() >= -kMultTol;
    for (int n = 0; ok && n < N; ++n) {
      if (!std::binary_search(S.begin(), S.end(), n) && ps.u(n) < -kMultTol) ok = false;
    }
    if (!ok) continue;

    double obj = objective_of(Q, ps.u);
    if (!found || obj < best.objective) {
      found = true;
      best = make_solution(Q, N, std::move(ps.u), std::move(S), ps.qt, 0);
    }
  }

  if (!found) throw NumericalError("solve_oracle: no feasible subset (internal error)");
  return best;
}

}
