#include "svi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace svi {

Vector FeasibleSet::project(const Vector& x) const {
  require_dimension(x, dimension(), "project");
  return do_project(x);
}

LinearMinimum FeasibleSet::linear_minimize(const Vector& cost) const {
  require_dimension(cost, dimension(), "linear_minimize");
  if (!capabilities().linear_minimization) {
    throw UnsupportedOperation("linear_minimize: set does not support linear minimization");
  }
  if (!cost.allFinite()) {
    throw std::invalid_argument("linear_minimize: non-finite cost");
  }
  return do_linear_minimize(cost);
}

LinearMinimum FeasibleSet::do_linear_minimize(const Vector&) const {
  throw UnsupportedOperation("linear_minimize: set does not support linear minimization");
}

// ---------------------------------------------------------------------------
// Box

Box::Box(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0 || lower_.size() != upper_.size()) {
    throw std::invalid_argument("Box: bounds must be non-empty and of equal size");
  }
  if (!lower_.allFinite() || !upper_.allFinite() || (lower_.array() > upper_.array()).any()) {
    throw std::invalid_argument("Box: bounds must be finite with lower <= upper");
  }
}

double Box::diameter_bound() const {
  return lower_.cwiseAbs().cwiseMax(upper_.cwiseAbs()).norm();
}

bool Box::contains(const Vector& y, double tol) const {
  if (y.size() != dimension()) return false;
  return ((y.array() >= lower_.array() - tol) && (y.array() <= upper_.array() + tol)).all();
}

Vector Box::sample_point(Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector y(dimension());
  for (Index i = 0; i < dimension(); ++i) {
    y[i] = lower_[i] + u(rng) * (upper_[i] - lower_[i]);
  }
  return y;
}

Vector Box::do_project(const Vector& x) const { return x.cwiseMax(lower_).cwiseMin(upper_); }

LinearMinimum Box::do_linear_minimize(const Vector& cost) const {
  LinearMinimum out;
  out.minimizer = lower_;
  for (Index i = 0; i < dimension(); ++i) {
    if (cost[i] < 0.0) out.minimizer[i] = upper_[i];
  }
  out.value = cost.dot(out.minimizer);
  return out;
}

// ---------------------------------------------------------------------------
// CournotBlock

CournotBlock::CournotBlock(Vector cap) : cap_(std::move(cap)) {
  if (cap_.size() == 0) throw std::invalid_argument("CournotBlock: need at least one node");
  if (!cap_.allFinite() || (cap_.array() < 0.0).any()) {
    throw std::invalid_argument("CournotBlock: capacities must be finite and nonnegative");
  }
  total_cap_ = cap_.sum();
}

double CournotBlock::diameter_bound() const {
  const double j = static_cast<double>(nodes());
  return std::sqrt(cap_.squaredNorm() + j * total_cap_ * total_cap_);
}

bool CournotBlock::contains(const Vector& y, double tol) const {
  if (y.size() != dimension()) return false;
  const Index j = nodes();
  const auto g = y.head(j).array();
  const auto s = y.tail(j).array();
  if ((g < -tol).any() || (g > cap_.array() + tol).any()) return false;
  if ((s < -tol).any() || (s > total_cap_ + tol).any()) return false;
  const double scale = std::max(1.0, y.head(j).cwiseAbs().sum());
  return std::abs(y.head(j).sum() - y.tail(j).sum()) <= tol * scale;
}

Vector CournotBlock::sample_point(Rng& rng) const {
  const Index j = nodes();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> e(1.0);
  Vector y(2 * j);
  for (Index k = 0; k < j; ++k) y[k] = u(rng) * cap_[k];
  Vector w(j);
  for (Index k = 0; k < j; ++k) w[k] = e(rng);
  const double total = y.head(j).sum();
  y.tail(j) = (total / w.sum()) * w;
  return y;
}

namespace {

// Sum g(nu) - sum s(nu); continuous, piecewise linear, nonincreasing in nu.
double balance_residual(const Eigen::Ref<const Vector>& g0, const Eigen::Ref<const Vector>& s0,
                        const Vector& cap, double nu) {
  double total = 0.0;
  for (Index k = 0; k < g0.size(); ++k) {
    total += std::clamp(g0[k] - nu, 0.0, cap[k]);
    total -= std::max(s0[k] + nu, 0.0);
  }
  return total;
}

}  // namespace

BlockProjection CournotBlock::project_parts(const Eigen::Ref<const Vector>& g0,
                                            const Eigen::Ref<const Vector>& s0) const {
  const Index j = nodes();
  if (g0.size() != j || s0.size() != j) {
    throw std::invalid_argument("project_cournot_block: dimension mismatch");
  }

  double nu = 0.0;
  if (balance_residual(g0, s0, cap_, 0.0) != 0.0) {
    std::vector<double> breaks;
    breaks.reserve(static_cast<std::size_t>(3 * j));
    for (Index k = 0; k < j; ++k) {
      breaks.push_back(g0[k] - cap_[k]);
      breaks.push_back(g0[k]);
      breaks.push_back(-s0[k]);
    }
    std::sort(breaks.begin(), breaks.end());

    // The residual at the smallest breakpoint equals sum(cap) >= 0; find the
    // last breakpoint where it is still nonnegative.
    std::size_t lo = 0;
    std::size_t hi = breaks.size() - 1;
    double r_lo = balance_residual(g0, s0, cap_, breaks[lo]);
    const double r_last = balance_residual(g0, s0, cap_, breaks[hi]);
    if (r_last >= 0.0) {
      // Past the last breakpoint every g is at zero and every s is free.
      nu = breaks[hi] + r_last / static_cast<double>(j);
    } else {
      while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        const double r_mid = balance_residual(g0, s0, cap_, breaks[mid]);
        if (r_mid >= 0.0) {
          lo = mid;
          r_lo = r_mid;
        } else {
          hi = mid;
        }
      }
      if (r_lo == 0.0) {
        nu = breaks[lo];
      } else {
        const double r_hi = balance_residual(g0, s0, cap_, breaks[hi]);
        nu = breaks[lo] + r_lo * (breaks[hi] - breaks[lo]) / (r_lo - r_hi);
      }
    }
  }

  BlockProjection out;
  out.multiplier = nu;
  out.g.resize(j);
  out.s.resize(j);
  for (Index k = 0; k < j; ++k) {
    out.g[k] = std::clamp(g0[k] - nu, 0.0, cap_[k]);
    out.s[k] = std::max(s0[k] + nu, 0.0);
  }
  return out;
}

Vector CournotBlock::do_project(const Vector& x) const {
  const Index j = nodes();
  BlockProjection p = project_parts(x.head(j), x.tail(j));
  Vector y(2 * j);
  y << p.g, p.s;
  return y;
}

LinearMinimum CournotBlock::do_linear_minimize(const Vector& cost) const {
  // For a common total t = sum g = sum s, the g half is a fractional knapsack
  // (cheapest nodes first) and the s half puts all of t on the cheapest node.
  // The value is convex piecewise linear in t; its minimum sits at t = 0 or
  // at a cumulative-capacity breakpoint.
  const Index j = nodes();
  const auto cg = cost.head(j);
  const auto cs = cost.tail(j);

  std::vector<Index> order(static_cast<std::size_t>(j));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index l, Index r) { return cg[l] < cg[r]; });
  Index cheapest_sale = 0;
  cs.minCoeff(&cheapest_sale);
  const double min_cs = cs[cheapest_sale];

  double best_value = 0.0;
  std::size_t best_filled = 0;
  double total = 0.0;
  double g_value = 0.0;
  for (std::size_t m = 0; m < order.size(); ++m) {
    const Index k = order[m];
    total += cap_[k];
    g_value += cg[k] * cap_[k];
    const double v = g_value + min_cs * total;
    if (v < best_value) {
      best_value = v;
      best_filled = m + 1;
    }
  }

  LinearMinimum out;
  out.minimizer = Vector::Zero(2 * j);
  double t = 0.0;
  for (std::size_t m = 0; m < best_filled; ++m) {
    out.minimizer[order[m]] = cap_[order[m]];
    t += cap_[order[m]];
  }
  out.minimizer[j + cheapest_sale] = t;
  out.value = cost.dot(out.minimizer);
  return out;
}

BlockProjection project_cournot_block(const CournotBlock& block, const Vector& g0,
                                      const Vector& s0) {
  return block.project_parts(g0, s0);
}

// ---------------------------------------------------------------------------
// ProductSet

ProductSet::ProductSet(std::vector<SetPtr> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw std::invalid_argument("ProductSet: need at least one block");
  offsets_.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    if (!b) throw std::invalid_argument("ProductSet: null block");
    offsets_.push_back(dimension_);
    dimension_ += b->dimension();
  }
}

double ProductSet::diameter_bound() const {
  double sq = 0.0;
  for (const auto& b : blocks_) {
    const double m = b->diameter_bound();
    sq += m * m;
  }
  return std::sqrt(sq);
}

SetCapabilities ProductSet::capabilities() const {
  SetCapabilities caps{true, true};
  for (const auto& b : blocks_) {
    const auto c = b->capabilities();
    caps.exact_projection = caps.exact_projection && c.exact_projection;
    caps.linear_minimization = caps.linear_minimization && c.linear_minimization;
  }
  return caps;
}

bool ProductSet::contains(const Vector& y, double tol) const {
  if (y.size() != dimension_) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Index n = blocks_[i]->dimension();
    if (!blocks_[i]->contains(y.segment(offsets_[i], n), tol)) return false;
  }
  return true;
}

Vector ProductSet::sample_point(Rng& rng) const {
  Vector y(dimension_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    y.segment(offsets_[i], blocks_[i]->dimension()) = blocks_[i]->sample_point(rng);
  }
  return y;
}

Vector ProductSet::do_project(const Vector& x) const {
  Vector y(dimension_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Index n = blocks_[i]->dimension();
    // Cournot blocks are the hot path; skip the temporary copy for them.
    if (const auto* cb = dynamic_cast<const CournotBlock*>(blocks_[i].get())) {
      const Index j = cb->nodes();
      BlockProjection p = cb->project_parts(x.segment(offsets_[i], j),
                                            x.segment(offsets_[i] + j, j));
      y.segment(offsets_[i], j) = p.g;
      y.segment(offsets_[i] + j, j) = p.s;
    } else {
      y.segment(offsets_[i], n) = blocks_[i]->project(x.segment(offsets_[i], n));
    }
  }
  return y;
}

LinearMinimum ProductSet::do_linear_minimize(const Vector& cost) const {
  LinearMinimum out;
  out.minimizer.resize(dimension_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Index n = blocks_[i]->dimension();
    LinearMinimum part = blocks_[i]->linear_minimize(cost.segment(offsets_[i], n));
    out.minimizer.segment(offsets_[i], n) = part.minimizer;
  }
  out.value = cost.dot(out.minimizer);
  return out;
}

// ---------------------------------------------------------------------------
// BallSampler

BallSampler::BallSampler(Index dimension, double radius) : dimension_(dimension), radius_(radius) {
  if (dimension < 1) throw std::invalid_argument("BallSampler: dimension must be positive");
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("BallSampler: radius must be finite and nonnegative");
  }
}

Vector BallSampler::sample(Rng& rng) const {
  Vector z = Vector::Zero(dimension_);
  if (radius_ == 0.0) return z;
  std::normal_distribution<double> normal(0.0, 1.0);
  double norm = 0.0;
  do {
    for (Index i = 0; i < dimension_; ++i) z[i] = normal(rng);
    norm = z.norm();
  } while (norm == 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double radial = radius_ * std::pow(u(rng), 1.0 / static_cast<double>(dimension_));
  z *= radial / norm;
  return z;
}

Vector sample_uniform_ball(const BallSampler& sampler, Rng& rng) { return sampler.sample(rng); }

}  // namespace svi
