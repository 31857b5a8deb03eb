#pragma once

// Feasible-set abstractions: Euclidean projection, linear minimization and
// the diameter bound M (sup of ||y|| over the set).

#include "svi/common.hpp"

#include <memory>
#include <vector>

namespace svi {

struct SetCapabilities {
  bool exact_projection = true;
  bool linear_minimization = false;
};

struct LinearMinimum {
  Vector minimizer;
  double value = 0.0;
};

/// Compact convex subset of R^n.
///
/// Public entry points validate dimensions and capabilities, then dispatch to
/// the protected hooks. Implementations are immutable and thread-safe.
class FeasibleSet {
 public:
  virtual ~FeasibleSet() = default;

  virtual Index dimension() const = 0;

  /// M with ||y|| <= M for every member y. May over-estimate.
  virtual double diameter_bound() const = 0;

  virtual SetCapabilities capabilities() const = 0;

  /// Membership test with absolute tolerance (scaled by magnitude for
  /// equality constraints).
  virtual bool contains(const Vector& y, double tol = 1e-10) const = 0;

  /// A random member; distribution is implementation-defined but covers the
  /// set. Used for multistart solvers and randomized tests.
  virtual Vector sample_point(Rng& rng) const = 0;

  Vector project(const Vector& x) const;
  LinearMinimum linear_minimize(const Vector& cost) const;

 protected:
  virtual Vector do_project(const Vector& x) const = 0;
  virtual LinearMinimum do_linear_minimize(const Vector& cost) const;
};

using SetPtr = std::shared_ptr<const FeasibleSet>;

/// Axis-aligned box [lower, upper].
class Box final : public FeasibleSet {
 public:
  Box(Vector lower, Vector upper);

  Index dimension() const override { return lower_.size(); }
  double diameter_bound() const override;
  SetCapabilities capabilities() const override { return {true, true}; }
  bool contains(const Vector& y, double tol = 1e-10) const override;
  Vector sample_point(Rng& rng) const override;

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

 protected:
  Vector do_project(const Vector& x) const override;
  LinearMinimum do_linear_minimize(const Vector& cost) const override;

 private:
  Vector lower_;
  Vector upper_;
};

struct BlockProjection {
  Vector g;
  Vector s;
  double multiplier = 0.0;  // nu in g = clip(g0 - nu), s = max(s0 + nu, 0)
};

/// One firm's production/sales set
///   { (g, s) : sum g = sum s, 0 <= g <= cap, 0 <= s <= sum(cap) }.
///
/// The sales bound is implied by the balance and capacity constraints; it is
/// carried explicitly so the set is compact. Coordinates are laid out as
/// (g_1..g_J, s_1..s_J).
class CournotBlock final : public FeasibleSet {
 public:
  explicit CournotBlock(Vector cap);

  Index nodes() const { return cap_.size(); }
  const Vector& cap() const { return cap_; }
  double total_cap() const { return total_cap_; }

  Index dimension() const override { return 2 * cap_.size(); }

  /// sqrt(||cap||^2 + J (sum cap)^2); loose but valid.
  double diameter_bound() const override;
  SetCapabilities capabilities() const override { return {true, true}; }
  bool contains(const Vector& y, double tol = 1e-10) const override;
  Vector sample_point(Rng& rng) const override;

  BlockProjection project_parts(const Eigen::Ref<const Vector>& g0,
                                const Eigen::Ref<const Vector>& s0) const;

 protected:
  Vector do_project(const Vector& x) const override;
  LinearMinimum do_linear_minimize(const Vector& cost) const override;

 private:
  Vector cap_;
  double total_cap_;
};

/// Cartesian product; projection and linear minimization act blockwise.
class ProductSet final : public FeasibleSet {
 public:
  explicit ProductSet(std::vector<SetPtr> blocks);

  const std::vector<SetPtr>& blocks() const { return blocks_; }
  Index offset(std::size_t block) const { return offsets_[block]; }

  Index dimension() const override { return dimension_; }
  double diameter_bound() const override;
  SetCapabilities capabilities() const override;
  bool contains(const Vector& y, double tol = 1e-10) const override;
  Vector sample_point(Rng& rng) const override;

 protected:
  Vector do_project(const Vector& x) const override;
  LinearMinimum do_linear_minimize(const Vector& cost) const override;

 private:
  std::vector<SetPtr> blocks_;
  std::vector<Index> offsets_;
  Index dimension_ = 0;
};

/// Exact KKT projection onto a Cournot block via breakpoint search on the
/// scalar balance multiplier.
BlockProjection project_cournot_block(const CournotBlock& block, const Vector& g0,
                                      const Vector& s0);

/// Uniform sampler on the closed ball B_n(0, radius).
class BallSampler {
 public:
  BallSampler(Index dimension, double radius);

  Index dimension() const { return dimension_; }
  double radius() const { return radius_; }

  /// Zero radius returns the origin without consuming the stream.
  Vector sample(Rng& rng) const;

 private:
  Index dimension_;
  double radius_;
};

Vector sample_uniform_ball(const BallSampler& sampler, Rng& rng);

}  // namespace svi
