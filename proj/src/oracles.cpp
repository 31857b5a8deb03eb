#include "svi/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace svi {

Vector VectorMap::jacobian_transpose_apply(const Vector& x, const Vector& v) const {
  require_dimension(x, dimension(), "jacobian_transpose_apply");
  require_dimension(v, dimension(), "jacobian_transpose_apply");
  Vector out(dimension());
  Vector probe = x;
  for (Index i = 0; i < dimension(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = v.dot(evaluate(probe));
    probe[i] = x[i] - h;
    const double down = v.dot(evaluate(probe));
    probe[i] = x[i];
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

FunctionMap::FunctionMap(Index dimension, Fn fn, JacTFn jac_t, std::optional<double> lipschitz,
                         bool affine)
    : dimension_(dimension),
      fn_(std::move(fn)),
      jac_t_(std::move(jac_t)),
      lipschitz_(lipschitz),
      affine_(affine) {
  if (dimension < 1 || !fn_) throw std::invalid_argument("FunctionMap: need dimension and map");
}

Vector FunctionMap::evaluate(const Vector& x) const {
  require_dimension(x, dimension_, "FunctionMap::evaluate");
  return fn_(x);
}

Vector FunctionMap::jacobian_transpose_apply(const Vector& x, const Vector& v) const {
  if (jac_t_) return jac_t_(x, v);
  return VectorMap::jacobian_transpose_apply(x, v);
}

DeterministicOracle::DeterministicOracle(MapPtr map, double bound_c, double extension_radius)
    : map_(std::move(map)), bound_c_(bound_c), extension_radius_(extension_radius) {
  if (!map_) throw std::invalid_argument("DeterministicOracle: null map");
  if (!(bound_c >= 0.0) || !(extension_radius >= 0.0)) {
    throw std::invalid_argument("DeterministicOracle: C and radius must be nonnegative");
  }
}

// ---------------------------------------------------------------------------
// Cournot game

CournotGame CournotGame::standard_5x4() {
  CournotGame g;
  g.firms = 5;
  g.nodes = 4;
  g.sigma = 1.0;
  g.a_lb = Vector::Constant(4, 49.5);
  g.a_ub = Vector::Constant(4, 50.5);
  g.b = Vector::Constant(4, 0.05);
  g.c = Vector::Constant(4, 1.5);
  g.d = Vector::Zero(4);
  g.cap = Vector::Constant(4, 300.0);
  return g;
}

void CournotGame::validate() const {
  if (firms < 1 || nodes < 1) throw std::invalid_argument("CournotGame: need firms, nodes >= 1");
  if (!(sigma >= 1.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("CournotGame: sigma must be >= 1");
  }
  const Index j = nodes;
  for (const Vector* v : {&a_lb, &a_ub, &b, &c, &d, &cap}) {
    if (v->size() != j) throw std::invalid_argument("CournotGame: per-node vectors need length J");
    if (!v->allFinite()) throw std::invalid_argument("CournotGame: non-finite parameter");
  }
  if ((a_lb.array() > a_ub.array()).any()) {
    throw std::invalid_argument("CournotGame: a_lb must not exceed a_ub");
  }
  if ((b.array() < 0.0).any() || (cap.array() < 0.0).any()) {
    throw std::invalid_argument("CournotGame: b and cap must be nonnegative");
  }
}

std::shared_ptr<ProductSet> CournotGame::feasible_set() const {
  validate();
  auto block = std::make_shared<const CournotBlock>(cap);
  return std::make_shared<ProductSet>(std::vector<SetPtr>(static_cast<std::size_t>(firms), block));
}

Vector cournot_map_with_intercept(const CournotGame& game, const Vector& x,
                                  const Vector& intercept) {
  require_dimension(x, game.dimension(), "cournot map");
  const int I = game.firms;
  const int J = game.nodes;
  Vector out(game.dimension());
  for (int j = 0; j < J; ++j) {
    double total = 0.0;
    for (int i = 0; i < I; ++i) total += x[game.s_index(i, j)];
    if (game.sigma == 1.0) {
      for (int i = 0; i < I; ++i) {
        out[game.g_index(i, j)] = game.c[j];
        out[game.s_index(i, j)] = game.b[j] * (total + x[game.s_index(i, j)]) - intercept[j];
      }
    } else {
      // Enlarged-set queries can push aggregate sales slightly negative.
      const double base = std::max(total, 0.0);
      const double level = std::pow(base, game.sigma);
      const double slope = game.sigma * std::pow(base, game.sigma - 1.0);
      for (int i = 0; i < I; ++i) {
        out[game.g_index(i, j)] = game.c[j];
        out[game.s_index(i, j)] =
            game.b[j] * (slope * x[game.s_index(i, j)] + level) - intercept[j];
      }
    }
  }
  return out;
}

Vector cournot_expected_map(const CournotGame& game, const Vector& x) {
  return cournot_map_with_intercept(game, x, game.mean_intercept());
}

Vector cournot_sample_map(const CournotGame& game, const Vector& x, Rng& rng) {
  Vector intercept(game.nodes);
  for (int j = 0; j < game.nodes; ++j) {
    std::uniform_real_distribution<double> u(game.a_lb[j], game.a_ub[j]);
    intercept[j] = game.a_lb[j] == game.a_ub[j] ? game.a_lb[j] : u(rng);
  }
  return cournot_map_with_intercept(game, x, intercept);
}

CournotMap::CournotMap(CournotGame game) : game_(std::move(game)) { game_.validate(); }

Vector CournotMap::evaluate(const Vector& x) const { return cournot_expected_map(game_, x); }

Vector CournotMap::jacobian_transpose_apply(const Vector& x, const Vector& v) const {
  require_dimension(x, dimension(), "CournotMap::jacobian_transpose_apply");
  require_dimension(v, dimension(), "CournotMap::jacobian_transpose_apply");
  const int I = game_.firms;
  const int J = game_.nodes;
  Vector out = Vector::Zero(dimension());
  for (int j = 0; j < J; ++j) {
    double v_sum = 0.0;
    double vs_sum = 0.0;
    double total = 0.0;
    for (int i = 0; i < I; ++i) {
      v_sum += v[game_.s_index(i, j)];
      vs_sum += v[game_.s_index(i, j)] * x[game_.s_index(i, j)];
      total += x[game_.s_index(i, j)];
    }
    const double b = game_.b[j];
    if (game_.sigma == 1.0) {
      for (int i = 0; i < I; ++i) out[game_.s_index(i, j)] = b * (v[game_.s_index(i, j)] + v_sum);
    } else {
      const double base = std::max(total, 1e-300);
      const double s1 = game_.sigma * std::pow(base, game_.sigma - 1.0);
      const double s2 = game_.sigma * (game_.sigma - 1.0) * std::pow(base, game_.sigma - 2.0);
      for (int i = 0; i < I; ++i) {
        out[game_.s_index(i, j)] = b * (s2 * vs_sum + s1 * v[game_.s_index(i, j)] + s1 * v_sum);
      }
    }
  }
  return out;
}

std::optional<double> CournotMap::lipschitz_bound() const {
  if (game_.sigma != 1.0) return std::nullopt;
  // Each node's sales block of A is b_j (I + 11^T): eigenvalues b_j, b_j (I+1).
  return game_.b.maxCoeff() * (game_.firms + 1);
}

std::pair<Eigen::MatrixXd, Vector> CournotMap::affine_form() const {
  if (game_.sigma != 1.0) throw UnsupportedOperation("affine_form: requires sigma = 1");
  const Index n = dimension();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < game_.nodes; ++j) {
    for (int i = 0; i < game_.firms; ++i) {
      for (int k = 0; k < game_.firms; ++k) {
        A(game_.s_index(i, j), game_.s_index(k, j)) = game_.b[j] * (i == k ? 2.0 : 1.0);
      }
    }
  }
  return {A, evaluate(Vector::Zero(n))};
}

CournotOracle::CournotOracle(CournotGame game, double extension_radius)
    : map_(std::make_shared<const CournotMap>(std::move(game))),
      extension_radius_(extension_radius) {
  if (!(extension_radius >= 0.0)) {
    throw std::invalid_argument("CournotOracle: extension radius must be nonnegative");
  }
  const CBound bound = bound_C_for_cournot(map_->game(), extension_radius_);
  bound_c_ = bound.C;
  bound_sampled_ = bound.sampled;
}

Vector CournotOracle::sample(const Vector& x, Rng& rng) const {
  return cournot_sample_map(map_->game(), x, rng);
}

CBound bound_C_for_cournot(const CournotGame& game, double extension_radius,
                           std::uint64_t sampling_seed) {
  game.validate();
  const double eps = extension_radius;
  const int I = game.firms;
  const int J = game.nodes;
  if (game.sigma == 1.0) {
    // Box enclosure of the enlarged set: s_ij in [-eps, S + eps] with S the
    // implied sales bound. The sales component b_j (s_ij + S_j) - a_j is
    // 2 s_ij + sum_{k != i} s_kj, so over the box it ranges over
    // b_j [-(I+1) eps, (I+1)(S+eps)] - [a_lb, a_ub].
    const double sales_bound = game.cap.sum();
    double sq = 0.0;
    for (int j = 0; j < J; ++j) {
      const double lo = -game.b[j] * (I + 1) * eps - game.a_ub[j];
      const double hi = game.b[j] * (I + 1) * (sales_bound + eps) - game.a_lb[j];
      const double m = std::max(std::abs(lo), std::abs(hi));
      sq += I * (m * m + game.c[j] * game.c[j]);
    }
    return {std::sqrt(sq), false};
  }

  // sigma > 1: Monte-Carlo estimate of the sup over the enlarged set.
  auto set = game.feasible_set();
  Rng rng(sampling_seed);
  const BallSampler ball(game.dimension(), eps);
  double best = 0.0;
  for (int t = 0; t < 20000; ++t) {
    Vector x = set->sample_point(rng) + ball.sample(rng);
    best = std::max(best, cournot_sample_map(game, x, rng).norm());
  }
  return {best, true};
}

// ---------------------------------------------------------------------------
// Smoothing

Vector smoothed_map_estimate(const StochasticMapOracle& oracle, const Vector& x, double eps,
                             long m, Rng& rng) {
  require_dimension(x, oracle.dimension(), "smoothed_map_estimate");
  if (m < 1) throw std::invalid_argument("smoothed_map_estimate: need m >= 1 draws");
  const BallSampler ball(oracle.dimension(), eps);
  const VectorMap* exact = oracle.expectation();
  if (eps == 0.0 && exact) return exact->evaluate(x);
  Vector sum = Vector::Zero(oracle.dimension());
  for (long t = 0; t < m; ++t) {
    const Vector y = x + ball.sample(rng);
    sum += exact ? exact->evaluate(y) : oracle.sample(y, rng);
  }
  return sum / static_cast<double>(m);
}

double double_factorial_ratio(Index n) {
  if (n < 0) throw std::invalid_argument("double_factorial_ratio: n must be nonnegative");
  // r(n) = n!!/(n-1)!! = n/(n-1) * r(n-2), r(0) = r(1) = 1.
  double ratio = 1.0;
  for (Index k = n; k >= 2; k -= 2) {
    ratio *= static_cast<double>(k) / static_cast<double>(k - 1);
  }
  return ratio;
}

double smoothing_lipschitz_constant(Index n, double C, double eps) {
  if (n < 1) throw std::invalid_argument("smoothing_lipschitz_constant: n must be >= 1");
  if (!(C > 0.0)) throw std::invalid_argument("smoothing_lipschitz_constant: C must be > 0");
  if (eps == 0.0) throw std::domain_error("smoothing_lipschitz_constant: division by zero eps");
  if (!(eps > 0.0)) throw std::invalid_argument("smoothing_lipschitz_constant: eps must be > 0");
  const double kappa = (n % 2 == 1) ? 1.0 : 2.0 / std::numbers::pi;
  return kappa * double_factorial_ratio(n) * C / eps;
}

SmoothedMap::SmoothedMap(MapPtr base, double eps, long draws, Rng& rng,
                         std::optional<double> lipschitz)
    : base_(std::move(base)), lipschitz_(lipschitz) {
  if (!base_) throw std::invalid_argument("SmoothedMap: null base map");
  if (draws < 1) throw std::invalid_argument("SmoothedMap: need at least one draw");
  if (!lipschitz_ && base_->is_affine()) lipschitz_ = base_->lipschitz_bound();
  if (!base_->is_affine() && eps > 0.0) {
    const BallSampler ball(base_->dimension(), eps);
    offsets_.reserve(static_cast<std::size_t>(draws));
    for (long t = 0; t < draws; ++t) offsets_.push_back(ball.sample(rng));
  }
}

Vector SmoothedMap::evaluate(const Vector& x) const {
  if (offsets_.empty()) return base_->evaluate(x);
  Vector sum = Vector::Zero(dimension());
  for (const Vector& z : offsets_) sum += base_->evaluate(x + z);
  return sum / static_cast<double>(offsets_.size());
}

// ---------------------------------------------------------------------------
// Noise diagnostics

NoiseStats noise_moments(const StochasticMapOracle& oracle, const Vector& x, long m, Rng& rng) {
  require_dimension(x, oracle.dimension(), "noise_moments");
  const VectorMap* exact = oracle.expectation();
  if (!exact) throw UnsupportedOperation("noise_moments: oracle has no exact expectation");
  if (m < 2) throw std::invalid_argument("noise_moments: need m >= 2 draws");

  const Index n = oracle.dimension();
  const Vector fx = exact->evaluate(x);
  // Welford on the vector and on ||w||^2.
  Vector mean = Vector::Zero(n);
  Vector m2 = Vector::Zero(n);
  double sq_mean = 0.0;
  double sq_m2 = 0.0;
  for (long t = 1; t <= m; ++t) {
    const Vector w = oracle.sample(x, rng) - fx;
    const Vector delta = w - mean;
    mean += delta / static_cast<double>(t);
    m2.array() += delta.array() * (w - mean).array();
    const double q = w.squaredNorm();
    const double dq = q - sq_mean;
    sq_mean += dq / static_cast<double>(t);
    sq_m2 += dq * (q - sq_mean);
  }
  NoiseStats stats;
  const double md = static_cast<double>(m);
  stats.mean_vector = mean;
  stats.mean_sq_norm = sq_mean;
  stats.sample_count = m;
  stats.mean_std_error = (m2 / (md - 1.0) / md).cwiseSqrt();
  stats.sq_norm_std_error = std::sqrt(sq_m2 / (md - 1.0) / md);
  return stats;
}

}  // namespace svi
