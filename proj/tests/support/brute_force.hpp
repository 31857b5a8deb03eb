#pragma once

// Slow reference solvers used only by tests.

#include "svi/common.hpp"

#include <limits>
#include <vector>

namespace svi::testing {

struct BruteProjection {
  Vector g;
  Vector s;
  bool found = false;
};

// min 0.5||g - g0||^2 + 0.5||s - s0||^2  s.t. sum g = sum s, 0 <= g <= cap, s >= 0.
//
// Enumerates every active-set pattern (g_j free / at 0 / at cap, s_j free /
// at 0), solves the equality-constrained subproblem in closed form and keeps
// the best feasible candidate. The optimum is the solution of its own
// pattern's subproblem, so it is always among the candidates.
inline BruteProjection brute_force_block_projection(const Vector& cap, const Vector& g0,
                                                    const Vector& s0, double feas_tol = 1e-12) {
  const Index J = cap.size();
  long patterns = 1;
  for (Index j = 0; j < J; ++j) patterns *= 6;

  BruteProjection best;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<int> gs(static_cast<std::size_t>(J)), ss(static_cast<std::size_t>(J));
  for (long code = 0; code < patterns; ++code) {
    long c = code;
    for (Index j = 0; j < J; ++j) {
      const int digit = static_cast<int>(c % 6);
      c /= 6;
      gs[static_cast<std::size_t>(j)] = digit % 3;  // 0 free, 1 at 0, 2 at cap
      ss[static_cast<std::size_t>(j)] = digit / 3;  // 0 free, 1 at 0
    }
    double fixed_g = 0.0, free_g0 = 0.0, free_s0 = 0.0;
    int n_free = 0;
    for (Index j = 0; j < J; ++j) {
      const auto u = static_cast<std::size_t>(j);
      if (gs[u] == 0) {
        free_g0 += g0[j];
        ++n_free;
      } else if (gs[u] == 2) {
        fixed_g += cap[j];
      }
      if (ss[u] == 0) {
        free_s0 += s0[j];
        ++n_free;
      }
    }
    // sum g = fixed_g + free_g0 - n_g nu ; sum s = free_s0 + n_s nu.
    double nu = 0.0;
    if (n_free > 0) {
      nu = (fixed_g + free_g0 - free_s0) / n_free;
    } else if (std::abs(fixed_g) > feas_tol) {
      continue;
    }
    Vector g(J), s(J);
    bool feasible = true;
    for (Index j = 0; j < J; ++j) {
      const auto u = static_cast<std::size_t>(j);
      g[j] = gs[u] == 0 ? g0[j] - nu : (gs[u] == 1 ? 0.0 : cap[j]);
      s[j] = ss[u] == 0 ? s0[j] + nu : 0.0;
      if (g[j] < -feas_tol || g[j] > cap[j] + feas_tol || s[j] < -feas_tol) feasible = false;
    }
    if (!feasible) continue;
    const double obj = 0.5 * ((g - g0).squaredNorm() + (s - s0).squaredNorm());
    if (obj < best_obj) {
      best_obj = obj;
      best.g = g;
      best.s = s;
      best.found = true;
    }
  }
  return best;
}

// min cost^T (g, s) over the block. Putting all sales on one node turns the
// problem into a box LP in g, so some optimum has every g_j in {0, cap_j}
// and a single positive s_j. Enumerate all of those.
inline double brute_force_block_lmo(const Vector& cap, const Vector& cost) {
  const Index J = cap.size();
  double best = std::numeric_limits<double>::infinity();
  for (long m = 0; m < (1L << J); ++m) {
    for (Index sj = 0; sj < J; ++sj) {
      Vector y = Vector::Zero(2 * J);
      for (Index j = 0; j < J; ++j) {
        if (m & (1L << j)) y[j] = cap[j];
      }
      y[J + sj] = y.head(J).sum();
      best = std::min(best, cost.dot(y));
    }
  }
  return best;
}

}  // namespace svi::testing
