#include "svi/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace svi {

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::SA:
      return "SA";
    case Scheme::RSA:
      return "RSA";
    case Scheme::RSSA:
      return "RSSA";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "SA") return Scheme::SA;
  if (name == "RSA") return Scheme::RSA;
  if (name == "RSSA") return Scheme::RSSA;
  throw std::invalid_argument("unknown scheme '" + name + "' (expected SA, RSA or RSSA)");
}

// ---------------------------------------------------------------------------
// SolverConfig

void SolverConfig::validate() const {
  if (horizon < 0) throw std::invalid_argument("solver config: horizon must be nonnegative");
  if (start.size() == 0) throw std::invalid_argument("solver config: missing start point");
  if (window_lambda && !(*window_lambda >= 0.0 && *window_lambda <= 1.0)) {
    throw std::invalid_argument("solver config: window lambda must lie in [0, 1]");
  }
  if (!std::isfinite(r)) throw std::invalid_argument("solver config: r must be finite");
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    if (ticks[i] < 0 || ticks[i] > horizon) {
      throw std::invalid_argument("solver config: checkpoint outside [0, horizon]");
    }
    if (i > 0 && ticks[i] <= ticks[i - 1]) {
      throw std::invalid_argument("solver config: checkpoints must be strictly increasing");
    }
  }
  if (const auto* rule = std::get_if<WindowStepRule>(&schedule)) {
    if (scheme != Scheme::SA) {
      throw std::invalid_argument("solver config: window stepsize rule is only defined for SA");
    }
    if (!(rule->M > 0.0) || !(rule->C > 0.0)) {
      throw std::invalid_argument("solver config: window rule needs M, C > 0");
    }
    return;
  }
  const auto& t = std::get<PowerLawTriple>(schedule);
  if (!(t.gamma0 > 0.0)) throw std::invalid_argument("solver config: gamma0 must be > 0");
  if (t.offset < 0.0) throw std::invalid_argument("solver config: offset must be >= 0");
  if (t.eta0 < 0.0 || t.eps0 < 0.0) {
    throw std::invalid_argument("solver config: eta0, eps0 must be >= 0");
  }
  switch (scheme) {
    case Scheme::SA:
      if (t.eta0 != 0.0 || t.eps0 != 0.0) {
        throw std::invalid_argument("solver config: SA requires eta0 = eps0 = 0");
      }
      break;
    case Scheme::RSA:
      if (!(t.eta0 > 0.0) || t.eps0 != 0.0) {
        throw std::invalid_argument("solver config: RSA requires eta0 > 0 and eps0 = 0");
      }
      break;
    case Scheme::RSSA:
      if (!(t.eta0 > 0.0) || !(t.eps0 > 0.0)) {
        throw std::invalid_argument("solver config: RSSA requires eta0 > 0 and eps0 > 0");
      }
      break;
  }
}

StepParameters SolverConfig::params(long k) const {
  if (const auto* rule = std::get_if<WindowStepRule>(&schedule)) {
    return {window_stepsize(rule->M, rule->C, rule->indicator_r, k), 0.0, 0.0};
  }
  return eval(std::get<PowerLawTriple>(schedule), k);
}

long window_start_index(double lambda, long horizon) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("window_start_index: lambda must lie in [0, 1]");
  }
  const double raw = lambda * static_cast<double>(horizon);
  return std::min(horizon, static_cast<long>(std::ceil(raw - 1e-9)));
}

long SolverConfig::window_start() const {
  if (!window_lambda) return 0;
  return window_start_index(*window_lambda, horizon);
}

// ---------------------------------------------------------------------------
// Step engine

void rssa_step(IterateState& state, const StochasticMapOracle& oracle, const FeasibleSet& set,
               double gamma, double eta, double eps) {
  if (!(gamma > 0.0)) throw std::invalid_argument("rssa_step: gamma must be > 0");
  if (eta < 0.0 || eps < 0.0) throw std::invalid_argument("rssa_step: eta, eps must be >= 0");

  Vector direction;
  if (eps > 0.0) {
    const Vector z = BallSampler(oracle.dimension(), eps).sample(state.rng);
    // The perturbed query may leave X; the oracle is defined on X + B(0, eps).
    direction = oracle.sample(state.x + z, state.rng);
  } else {
    direction = oracle.sample(state.x, state.rng);
  }
  if (!direction.allFinite()) {
    throw PoisonedState("rssa_step: oracle returned a non-finite sample at iteration " +
                            std::to_string(state.k),
                        state.k);
  }
  if (eta != 0.0) direction += eta * state.x;
  state.x = set.project(state.x - gamma * direction);
  ++state.k;
}

// ---------------------------------------------------------------------------
// Averaging

void AveragingState::accumulate(double gamma, const Vector& x, double r) {
  if (!(gamma > 0.0)) throw std::invalid_argument("accumulate: gamma must be > 0");
  if (count_ == 0) {
    r_ = r;
    reference_gamma_ = gamma;
    sum_ = Vector::Zero(x.size());
    comp_ = Vector::Zero(x.size());
  } else {
    if (r != r_) throw std::invalid_argument("accumulate: exponent r changed mid-stream");
    require_dimension(x, sum_.size(), "accumulate");
  }
  const double w = r == 0.0 ? 1.0 : std::pow(gamma / reference_gamma_, r);
  weight_.add(w);
  for (Index i = 0; i < x.size(); ++i) {
    const double v = w * x[i];
    const double t = sum_[i] + v;
    if (std::abs(sum_[i]) >= std::abs(v)) {
      comp_[i] += (sum_[i] - t) + v;
    } else {
      comp_[i] += (v - t) + sum_[i];
    }
    sum_[i] = t;
  }
  ++count_;
}

Vector AveragingState::average() const {
  if (count_ == 0) throw std::logic_error("AveragingState: no iterates accumulated");
  return (sum_ + comp_) / weight_.value();
}

AveragingState accumulate(AveragingState avg, double gamma, const Vector& x, double r) {
  avg.accumulate(gamma, x, r);
  return avg;
}

void WindowBuffer::push(long t, double gamma, const Vector& x) {
  if (t < first_) return;
  if (t != first_ + size()) {
    throw std::invalid_argument("WindowBuffer: iterates must be pushed consecutively");
  }
  entries_.emplace_back(gamma, x);
}

Vector window_average(const WindowBuffer& buffer, long ell, long k, double r) {
  if (ell > k) throw std::invalid_argument("window_average: empty window (l > k)");
  if (ell < buffer.first() || k >= buffer.first() + buffer.size()) {
    throw std::invalid_argument("window_average: window not covered by the buffer");
  }
  AveragingState avg;
  for (long t = ell; t <= k; ++t) avg.accumulate(buffer.gamma(t), buffer.point(t), r);
  return avg.average();
}

// ---------------------------------------------------------------------------
// Extragradient solvers

TrajectoryPoint extragradient_solve(const FeasibleSet& set, const VectorMap& map, double eta,
                                    const ExtragradientOptions& options) {
  if (eta < 0.0) throw std::invalid_argument("extragradient_solve: eta must be >= 0");
  const std::optional<double> lip = options.lipschitz ? options.lipschitz : map.lipschitz_bound();
  if (!lip || !(*lip + eta > 0.0)) {
    throw std::invalid_argument("extragradient_solve: need a positive Lipschitz bound");
  }
  // 1/(L + eta) itself can stall on linear maps; stay strictly inside.
  const double tau = 0.9 / (*lip + eta);
  Vector x = set.project(options.warm_start ? *options.warm_start
                                            : Vector::Zero(set.dimension()));
  double residual = 0.0;
  for (long it = 0; it < options.max_iterations; ++it) {
    Vector gx = map.evaluate(x);
    if (eta != 0.0) gx += eta * x;
    const Vector y = set.project(x - tau * gx);
    residual = (x - y).norm();
    if (!std::isfinite(residual)) {
      throw ConvergenceFailure("extragradient_solve: non-finite residual", residual, it);
    }
    if (residual <= options.tol) return {0, std::move(x), residual, it};
    Vector gy = map.evaluate(y);
    if (eta != 0.0) gy += eta * y;
    x = set.project(x - tau * gy);
  }
  throw ConvergenceFailure("extragradient_solve: iteration cap reached (residual " +
                               std::to_string(residual) + ")",
                           residual, options.max_iterations);
}

TrajectoryPoint tikhonov_solve(const FeasibleSet& set, const StochasticMapOracle& oracle,
                               MapKind kind, double eta, double eps, double tol,
                               ExtragradientOptions options, std::uint64_t smoothing_seed,
                               long smoothing_draws) {
  if (!(eta > 0.0)) throw std::invalid_argument("tikhonov_solve: eta must be > 0");
  const VectorMap* exact = oracle.expectation();
  if (!exact) throw UnsupportedOperation("tikhonov_solve: oracle has no exact expectation");
  options.tol = tol;
  if (kind == MapKind::exact || eps == 0.0 || exact->is_affine()) {
    // Smoothing with a zero-mean perturbation leaves an affine map unchanged.
    return extragradient_solve(set, *exact, eta, options);
  }
  Rng rng(smoothing_seed);
  // Non-owning alias: the oracle outlives this call.
  MapPtr base(std::shared_ptr<const VectorMap>{}, exact);
  std::optional<double> lip = options.lipschitz;
  if (!lip) lip = smoothing_lipschitz_constant(set.dimension(), oracle.bound_C(), eps);
  const SmoothedMap smoothed(base, eps, smoothing_draws, rng, lip);
  return extragradient_solve(set, smoothed, eta, options);
}

Vector reference_solution(const FeasibleSet& set, const VectorMap& map, double tol,
                          ExtragradientOptions options) {
  options.tol = tol;
  return extragradient_solve(set, map, 0.0, options).s;
}

// ---------------------------------------------------------------------------
// Paths

PathRecord run_path(const SolverConfig& config, const StochasticMapOracle& oracle,
                    const FeasibleSet& set, std::uint64_t seed, long path_id) {
  config.validate();
  require_dimension(config.start, set.dimension(), "run_path start");

  std::vector<long> ticks = config.ticks;
  if (ticks.empty()) ticks.push_back(config.horizon);

  IterateState state{0, set.project(config.start), Rng(seed)};
  AveragingState full;
  AveragingState windowed;
  const long ell = config.window_start();

  PathRecord record;
  record.path_id = path_id;
  record.seed = seed;
  record.checkpoints.reserve(ticks.size());

  std::size_t next_tick = 0;
  for (long k = 0;; ++k) {
    const StepParameters p = config.params(k);
    full.accumulate(p.gamma, state.x, config.r);
    if (config.window_lambda && k >= ell) windowed.accumulate(p.gamma, state.x, config.r);

    bool ticked = false;
    if (next_tick < ticks.size() && ticks[next_tick] == k) {
      Checkpoint cp;
      cp.k = k;
      cp.x = state.x;
      cp.average = full.average();
      if (!windowed.empty()) cp.window = windowed.average();
      cp.params = p;
      record.checkpoints.push_back(std::move(cp));
      ++next_tick;
      ticked = true;
    }
    if (k == config.horizon) break;

    try {
      rssa_step(state, oracle, set, p.gamma, p.eta, p.eps);
    } catch (const PoisonedState& e) {
      throw PoisonedState("path " + std::to_string(path_id) + ": " + e.what(), e.iteration());
    }
    if (ticked) record.checkpoints.back().next = state.x;
  }
  return record;
}

// ---------------------------------------------------------------------------
// Tikhonov trajectory

TikhonovTrajectory::TikhonovTrajectory(const FeasibleSet& set, const StochasticMapOracle& oracle,
                                       PowerLawTriple schedule, double tol)
    : set_(set), oracle_(oracle), schedule_(schedule), tol_(tol) {
  if (!(schedule_.eta0 > 0.0)) {
    throw std::invalid_argument("TikhonovTrajectory: needs eta0 > 0");
  }
}

const TrajectoryPoint& TikhonovTrajectory::at(long k) {
  if (auto it = points_.find(k); it != points_.end()) return it->second;
  ExtragradientOptions options;
  if (!points_.empty()) {
    auto near = points_.lower_bound(k);
    if (near == points_.end()) --near;
    options.warm_start = near->second.s;
  }
  const StepParameters p = eval(schedule_, k);
  TrajectoryPoint point =
      tikhonov_solve(set_, oracle_, MapKind::smoothed, p.eta, p.eps, tol_, options);
  point.k = k;
  return points_.emplace(k, std::move(point)).first->second;
}

void TikhonovTrajectory::precompute(const std::vector<long>& ks) {
  for (long k : ks) at(k);
}

std::vector<TrackingSample> trajectory_gap_series(const PathRecord& record,
                                                  const PowerLawTriple& schedule,
                                                  const StochasticMapOracle& oracle,
                                                  const FeasibleSet& set, double tol,
                                                  TikhonovTrajectory* cache) {
  if (!(schedule.eta0 > 0.0) || !(schedule.eps0 > 0.0)) {
    throw std::invalid_argument("trajectory_gap_series: needs eta0, eps0 > 0");
  }
  std::optional<TikhonovTrajectory> local;
  if (!cache) {
    local.emplace(set, oracle, schedule, tol);
    cache = &*local;
  }
  std::vector<TrackingSample> series;
  for (const Checkpoint& cp : record.checkpoints) {
    if (!cp.next) continue;
    const StepParameters p = eval(schedule, cp.k);
    const Vector& s = cache->has(cp.k) ? cache->cached(cp.k).s : cache->at(cp.k).s;
    series.push_back({cp.k, (*cp.next - s).squaredNorm(), p.gamma / (p.eta * p.eps * p.eps)});
  }
  return series;
}

}  // namespace svi
