#pragma once

// Stochastic map contracts, the networked Nash-Cournot game mapping, the
// Monte-Carlo smoothed-map estimator and noise diagnostics.

#include "svi/common.hpp"
#include "svi/geometry.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace svi {

/// Deterministic vector field F : R^n -> R^n.
class VectorMap {
 public:
  virtual ~VectorMap() = default;

  virtual Index dimension() const = 0;
  virtual Vector evaluate(const Vector& x) const = 0;

  /// J_F(x)^T v. The default uses central differences on v^T F.
  virtual Vector jacobian_transpose_apply(const Vector& x, const Vector& v) const;

  /// Global Lipschitz constant when known.
  virtual std::optional<double> lipschitz_bound() const { return std::nullopt; }

  /// True when F(x) = A x + q; smoothing with a zero-mean perturbation then
  /// leaves the map unchanged.
  virtual bool is_affine() const { return false; }
};

using MapPtr = std::shared_ptr<const VectorMap>;

/// VectorMap backed by callables; convenient for small analytic test maps.
class FunctionMap final : public VectorMap {
 public:
  using Fn = std::function<Vector(const Vector&)>;
  using JacTFn = std::function<Vector(const Vector&, const Vector&)>;

  FunctionMap(Index dimension, Fn fn, JacTFn jac_t = {}, std::optional<double> lipschitz = {},
              bool affine = false);

  Index dimension() const override { return dimension_; }
  Vector evaluate(const Vector& x) const override;
  Vector jacobian_transpose_apply(const Vector& x, const Vector& v) const override;
  std::optional<double> lipschitz_bound() const override { return lipschitz_; }
  bool is_affine() const override { return affine_; }

 private:
  Index dimension_;
  Fn fn_;
  JacTFn jac_t_;
  std::optional<double> lipschitz_;
  bool affine_;
};

/// Sampler x -> Phi(x, xi) with optional exact expectation F(x) = E Phi(x, xi).
///
/// bound_C is the C with E||Phi(x, xi)||^2 <= C^2 on the enlarged set
/// X + B(0, extension_radius). Oracles are immutable after construction.
class StochasticMapOracle {
 public:
  virtual ~StochasticMapOracle() = default;

  virtual Index dimension() const = 0;
  virtual Vector sample(const Vector& x, Rng& rng) const = 0;
  virtual const VectorMap* expectation() const { return nullptr; }
  virtual double bound_C() const = 0;
  virtual double extension_radius() const = 0;
};

using OraclePtr = std::shared_ptr<const StochasticMapOracle>;

/// Noise-free oracle: sample(x) == F(x), consumes no randomness.
class DeterministicOracle final : public StochasticMapOracle {
 public:
  DeterministicOracle(MapPtr map, double bound_c, double extension_radius);

  Index dimension() const override { return map_->dimension(); }
  Vector sample(const Vector& x, Rng&) const override { return map_->evaluate(x); }
  const VectorMap* expectation() const override { return map_.get(); }
  double bound_C() const override { return bound_c_; }
  double extension_radius() const override { return extension_radius_; }

 private:
  MapPtr map_;
  double bound_c_;
  double extension_radius_;
};

// ---------------------------------------------------------------------------
// Networked Nash-Cournot game

/// I firms selling over J nodes. Price at node j is a_j - b_j * S_j^sigma
/// with S_j the aggregate sales and a_j ~ U[a_lb_j, a_ub_j]; firm i pays
/// c_j g_ij + d_j to produce at node j, subject to capacity cap_j.
///
/// Decision vector layout: x = (g_1, s_1, ..., g_I, s_I), each block of
/// length J.
struct CournotGame {
  int firms = 0;
  int nodes = 0;
  double sigma = 1.0;
  Vector a_lb;
  Vector a_ub;
  Vector b;
  Vector c;
  Vector d;  // fixed costs; drop out of every gradient
  Vector cap;

  /// Five firms, four nodes, sigma = 1, a ~ U[49.5, 50.5], cap = 300,
  /// b = 0.05, c = 1.5, d = 0.
  static CournotGame standard_5x4();

  Index dimension() const { return 2 * static_cast<Index>(firms) * nodes; }
  Index g_index(int firm, int node) const { return static_cast<Index>(firm) * 2 * nodes + node; }
  Index s_index(int firm, int node) const { return g_index(firm, node) + nodes; }

  Vector mean_intercept() const { return 0.5 * (a_lb + a_ub); }

  void validate() const;

  /// Product of identical Cournot blocks, one per firm.
  std::shared_ptr<ProductSet> feasible_set() const;

  bool operator==(const CournotGame&) const = default;
};

/// Game gradient map for a given realization of the price intercepts.
Vector cournot_map_with_intercept(const CournotGame& game, const Vector& x,
                                  const Vector& intercept);

/// E[grad_{x_i} f_i(x, xi)] stacked over firms.
Vector cournot_expected_map(const CournotGame& game, const Vector& x);

/// One draw: a single intercept per node, shared by every firm.
Vector cournot_sample_map(const CournotGame& game, const Vector& x, Rng& rng);

class CournotMap final : public VectorMap {
 public:
  explicit CournotMap(CournotGame game);

  const CournotGame& game() const { return game_; }

  Index dimension() const override { return game_.dimension(); }
  Vector evaluate(const Vector& x) const override;
  Vector jacobian_transpose_apply(const Vector& x, const Vector& v) const override;
  std::optional<double> lipschitz_bound() const override;
  bool is_affine() const override { return game_.sigma == 1.0; }

  /// For sigma = 1: the (A, q) with F(x) = A x + q.
  std::pair<Eigen::MatrixXd, Vector> affine_form() const;

 private:
  CournotGame game_;
};

class CournotOracle final : public StochasticMapOracle {
 public:
  /// C is computed by bound_C_for_cournot at the given extension radius.
  CournotOracle(CournotGame game, double extension_radius);

  const CournotGame& game() const { return map_->game(); }
  bool bound_is_sampled() const { return bound_sampled_; }

  Index dimension() const override { return map_->dimension(); }
  Vector sample(const Vector& x, Rng& rng) const override;
  const VectorMap* expectation() const override { return map_.get(); }
  double bound_C() const override { return bound_c_; }
  double extension_radius() const override { return extension_radius_; }

 private:
  std::shared_ptr<const CournotMap> map_;
  double extension_radius_;
  double bound_c_;
  bool bound_sampled_;
};

struct CBound {
  double C = 0.0;
  bool sampled = false;  // true when sigma > 1 forced a Monte-Carlo estimate
};

/// C with ||Phi(x, xi)|| <= C for every x in a box enclosure of the
/// eps-enlarged feasible set and every intercept realization (sigma = 1).
/// The enclosure makes this an over-estimate.
CBound bound_C_for_cournot(const CournotGame& game, double extension_radius,
                           std::uint64_t sampling_seed = 0x5eed);

// ---------------------------------------------------------------------------
// Smoothing

/// (1/m) sum_i Phi_or_F(x + z_i) with z_i uniform on B_n(0, eps). Uses the
/// exact expectation inside the ball average when the oracle has one.
Vector smoothed_map_estimate(const StochasticMapOracle& oracle, const Vector& x, double eps,
                             long m, Rng& rng);

/// kappa * n!!/(n-1)!! * C / eps; kappa = 1 for odd n, 2/pi for even n.
double smoothing_lipschitz_constant(Index n, double C, double eps);

/// n!!/(n-1)!! computed as a running product (no factorial overflow).
double double_factorial_ratio(Index n);

/// Deterministic surrogate of the smoothed map E F(x + z) built from a fixed
/// set of ball draws (common random numbers). For affine F it returns F
/// itself, which is the exact smoothed map.
class SmoothedMap final : public VectorMap {
 public:
  SmoothedMap(MapPtr base, double eps, long draws, Rng& rng,
              std::optional<double> lipschitz = std::nullopt);

  Index dimension() const override { return base_->dimension(); }
  Vector evaluate(const Vector& x) const override;
  std::optional<double> lipschitz_bound() const override { return lipschitz_; }
  bool is_affine() const override { return base_->is_affine(); }

 private:
  MapPtr base_;
  std::vector<Vector> offsets_;
  std::optional<double> lipschitz_;
};

// ---------------------------------------------------------------------------
// Noise diagnostics

struct NoiseStats {
  Vector mean_vector;       // empirical E[w], w = Phi - F
  double mean_sq_norm = 0;  // empirical E||w||^2
  long sample_count = 0;
  Vector mean_std_error;    // componentwise standard error of mean_vector
  double sq_norm_std_error = 0;
};

NoiseStats noise_moments(const StochasticMapOracle& oracle, const Vector& x, long m, Rng& rng);

}  // namespace svi
