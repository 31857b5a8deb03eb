#pragma once

// The regularized smoothed stochastic approximation engine (plain SA and the
// regularized variant are the degenerate cases), weighted and window
// averaging, and extragradient solvers for the Tikhonov trajectory and the
// reference solution.

#include "svi/common.hpp"
#include "svi/geometry.hpp"
#include "svi/oracles.hpp"
#include "svi/schedules.hpp"

#include <map>
#include <optional>
#include <variant>
#include <vector>

namespace svi {

enum class Scheme { SA, RSA, RSSA };

const char* to_string(Scheme scheme);
Scheme parse_scheme(const std::string& name);

/// gamma_k = window_stepsize(M, C, indicator_r, k); used with plain SA.
struct WindowStepRule {
  double M = 1.0;
  double C = 1.0;
  double indicator_r = 1.0;

  bool operator==(const WindowStepRule&) const = default;
};

using StepRule = std::variant<PowerLawTriple, WindowStepRule>;

/// ceil(lambda N), ignoring floating error below 1e-9 (0.3 * 1000 -> 300).
long window_start_index(double lambda, long horizon);

struct SolverConfig {
  Scheme scheme = Scheme::RSSA;
  StepRule schedule = PowerLawTriple{};
  double r = 1.0;                       // averaging exponent (weights gamma_t^r)
  std::optional<double> window_lambda;  // window start l = ceil(lambda N)
  long horizon = 0;                     // N
  std::vector<long> ticks;              // checkpoint iterations; empty = {N}
  Vector start;                         // projected onto X before iterating

  /// Scheme/schedule consistency: SA needs eta0 = eps0 = 0, RSA needs
  /// eta0 > 0 and eps0 = 0, RSSA needs eta0, eps0 > 0.
  void validate() const;

  StepParameters params(long k) const;
  long window_start() const;
};

struct IterateState {
  long k = 0;
  Vector x;
  Rng rng;
};

/// x <- Pi_X(x - gamma (Phi(x + z, xi) + eta x)), z uniform on B(0, eps).
/// Exactly one oracle sample and one projection; the ball draw is skipped
/// when eps = 0 and the regularizer when eta = 0.
void rssa_step(IterateState& state, const StochasticMapOracle& oracle, const FeasibleSet& set,
               double gamma, double eta, double eps);

/// Running weighted average sum gamma_t^r x_t / sum gamma_t^r.
///
/// Weights are stored relative to the first stepsize seen, and both sums use
/// Neumaier compensation so that r = -1 with tiny stepsizes stays accurate.
class AveragingState {
 public:
  void accumulate(double gamma, const Vector& x, double r);

  bool empty() const { return count_ == 0; }
  long count() const { return count_; }
  Vector average() const;

  /// sum_t (gamma_t / gamma_ref)^r.
  double scaled_weight_sum() const { return weight_.value(); }
  double reference_gamma() const { return reference_gamma_; }

 private:
  long count_ = 0;
  double r_ = 0.0;
  double reference_gamma_ = 0.0;
  CompensatedSum weight_;
  Vector sum_;
  Vector comp_;
};

AveragingState accumulate(AveragingState avg, double gamma, const Vector& x, double r);

/// Stored (gamma_t, x_t) for consecutive t >= first().
class WindowBuffer {
 public:
  explicit WindowBuffer(long first_stored = 0) : first_(first_stored) {}

  /// Entries with t < first_stored are dropped; stored t must be consecutive.
  void push(long t, double gamma, const Vector& x);

  long first() const { return first_; }
  long size() const { return static_cast<long>(entries_.size()); }
  double gamma(long t) const { return entries_.at(static_cast<std::size_t>(t - first_)).first; }
  const Vector& point(long t) const {
    return entries_.at(static_cast<std::size_t>(t - first_)).second;
  }

 private:
  long first_;
  std::vector<std::pair<double, Vector>> entries_;
};

/// sum_{t=l}^{k} gamma_t^r x_t / sum_{t=l}^{k} gamma_t^r. l = 0 means full
/// averaging; l = k returns x_k.
Vector window_average(const WindowBuffer& buffer, long ell, long k, double r);

struct ExtragradientOptions {
  double tol = 1e-8;
  long max_iterations = 1'000'000;
  std::optional<double> lipschitz;  // defaults to the map's own bound
  std::optional<Vector> warm_start;
};

struct TrajectoryPoint {
  long k = 0;
  Vector s;
  /// ||s - Pi_X(s - tau (F(s) + eta s))|| with tau = 0.9/(L + eta).
  double residual = 0.0;
  long iterations = 0;
};

/// Extragradient on G = F + eta I with step 0.9/(L + eta) until the
/// fixed-point residual drops to tol.
TrajectoryPoint extragradient_solve(const FeasibleSet& set, const VectorMap& map, double eta,
                                    const ExtragradientOptions& options);

enum class MapKind { exact, smoothed };

/// Solution of VI(X, F_k + eta I): F_k = F (exact) or the smoothed map with
/// radius eps estimated from smoothing_draws common random numbers.
TrajectoryPoint tikhonov_solve(const FeasibleSet& set, const StochasticMapOracle& oracle,
                               MapKind kind, double eta, double eps, double tol,
                               ExtragradientOptions options = {},
                               std::uint64_t smoothing_seed = 1, long smoothing_draws = 10000);

/// High-accuracy solution of VI(X, F) (extragradient, step 0.9/L).
Vector reference_solution(const FeasibleSet& set, const VectorMap& map, double tol = 1e-10,
                          ExtragradientOptions options = {});

struct Checkpoint {
  long k = 0;
  Vector x;                       // x_k
  Vector average;                 // weighted average of x_0..x_k
  std::optional<Vector> window;   // weighted average of x_l..x_k, when k >= l
  std::optional<Vector> next;     // x_{k+1}, when k < N
  StepParameters params;          // (gamma_k, eta_k, eps_k)
};

struct PathRecord {
  long path_id = 0;
  std::uint64_t seed = 0;
  std::vector<Checkpoint> checkpoints;
};

/// One sample path; a deterministic function of (config, seed).
PathRecord run_path(const SolverConfig& config, const StochasticMapOracle& oracle,
                    const FeasibleSet& set, std::uint64_t seed, long path_id = 0);

/// Lazily computed s_k, warm-started from the nearest computed neighbour.
/// Not thread-safe while computing; call precompute() before sharing.
class TikhonovTrajectory {
 public:
  TikhonovTrajectory(const FeasibleSet& set, const StochasticMapOracle& oracle,
                     PowerLawTriple schedule, double tol);

  const TrajectoryPoint& at(long k);
  void precompute(const std::vector<long>& ks);
  const TrajectoryPoint& cached(long k) const { return points_.at(k); }
  bool has(long k) const { return points_.count(k) > 0; }

 private:
  const FeasibleSet& set_;
  const StochasticMapOracle& oracle_;
  PowerLawTriple schedule_;
  double tol_;
  std::map<long, TrajectoryPoint> points_;
};

struct TrackingSample {
  long k = 0;
  double sq_error = 0.0;     // ||x_{k+1} - s_k||^2
  double bound_ratio = 0.0;  // gamma_k / (eta_k eps_k^2)
};

/// Pairs ||x_{k+1} - s_k||^2 with gamma_k/(eta_k eps_k^2) at every checkpoint
/// that has a successor iterate.
std::vector<TrackingSample> trajectory_gap_series(const PathRecord& record,
                                                  const PowerLawTriple& schedule,
                                                  const StochasticMapOracle& oracle,
                                                  const FeasibleSet& set, double tol,
                                                  TikhonovTrajectory* cache = nullptr);

}  // namespace svi
