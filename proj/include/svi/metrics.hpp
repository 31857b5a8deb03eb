#pragma once

// Gap functions, distance to a reference solution, log-log rate fits and the
// two window-averaging error bounds.

#include "svi/common.hpp"
#include "svi/geometry.hpp"
#include "svi/oracles.hpp"

#include <cstdint>
#include <vector>

namespace svi {

enum class GapMethod { strong_lp, weak_multistart };

const char* to_string(GapMethod method);

struct GapReport {
  double value = 0.0;
  Vector certificate;  // feasible y attaining (approximately) the sup
  GapMethod method = GapMethod::strong_lp;
  int restarts = 0;
  double tolerance = 0.0;
  bool converged = true;
  /// Frank-Wolfe gap of the objective at the certificate. For concave
  /// objectives value + fw_gap bounds the true sup from above.
  double fw_gap = 0.0;
};

/// sup_y F(x)^T (x - y), solved exactly with one linear minimization.
GapReport strong_gap(const VectorMap& map, const FeasibleSet& set, const Vector& x);

/// sup_y F(y)^T (x - y) by accelerated projected gradient ascent started from
/// x, the strong-gap certificate and `restarts` random feasible points.
/// Random starts come from Rng(seed) in order, so raising `restarts` only
/// adds starts.
GapReport weak_gap(const VectorMap& map, const FeasibleSet& set, const Vector& x,
                   int restarts = 16, double tol = 1e-8, std::uint64_t seed = 0x9a9);

double dist_to_solution(const Vector& x, const Vector& x_star);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log(gap) on log(N).
RateFit loglog_rate_fit(const std::vector<double>& Ns, const std::vector<double>& gaps);

struct WindowBounds {
  double ub1 = 0.0;
  double ub2 = 0.0;
  double h = 0.0;
};

double window_bound_ratio(double lambda);

/// Requires 0 < lambda < 1, N > 1/(1 - lambda) and ell = ceil(lambda N).
WindowBounds ub_bounds(double M, double C, double lambda, long N, long ell);

}  // namespace svi
