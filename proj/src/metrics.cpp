#include "svi/metrics.hpp"

#include "svi/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace svi {

const char* to_string(GapMethod method) {
  return method == GapMethod::strong_lp ? "strong_lp" : "weak_multistart";
}

GapReport strong_gap(const VectorMap& map, const FeasibleSet& set, const Vector& x) {
  require_dimension(x, set.dimension(), "strong_gap");
  if (!set.capabilities().linear_minimization) {
    throw UnsupportedOperation("strong_gap: set has no linear minimization oracle");
  }
  const Vector f = map.evaluate(x);
  const LinearMinimum lm = set.linear_minimize(f);
  GapReport report;
  report.value = f.dot(x) - lm.value;
  report.certificate = lm.minimizer;
  report.method = GapMethod::strong_lp;
  return report;
}

namespace {

struct AscentResult {
  Vector y;
  double value = 0.0;
  double fw_gap = 0.0;
  bool converged = false;
};

class WeakGapObjective {
 public:
  WeakGapObjective(const VectorMap& map, const FeasibleSet& set, const Vector& x)
      : map_(map), set_(set), x_(x) {}

  double value(const Vector& y) const { return map_.evaluate(y).dot(x_ - y); }

  // phi(y) and its gradient J(y)^T (x - y) - F(y).
  double value_and_gradient(const Vector& y, Vector& grad) const {
    const Vector f = map_.evaluate(y);
    const Vector d = x_ - y;
    grad = map_.jacobian_transpose_apply(y, d) - f;
    return f.dot(d);
  }

  // max_{y' in X} grad^T (y' - y) >= 0.
  double fw_gap(const Vector& y, const Vector& grad) const {
    const LinearMinimum lm = set_.linear_minimize(-grad);
    return std::max(0.0, -lm.value - grad.dot(y));
  }

  const FeasibleSet& set() const { return set_; }

 private:
  const VectorMap& map_;
  const FeasibleSet& set_;
  const Vector& x_;
};

// FISTA with backtracking and function-value restart, on -phi.
AscentResult ascend(const WeakGapObjective& obj, Vector y, double tol, double& L) {
  constexpr int kMaxIterations = 3000;
  constexpr int kCheckEvery = 10;

  Vector grad;
  double val = obj.value_and_gradient(y, grad);
  AscentResult out;
  out.y = y;
  out.value = val;

  Vector w = y;
  Vector grad_w = grad;
  double val_w = val;
  double t = 1.0;
  for (int it = 1; it <= kMaxIterations; ++it) {
    Vector y_next;
    double val_next = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      y_next = obj.set().project(w + grad_w / L);
      const Vector step = y_next - w;
      val_next = obj.value(y_next);
      const double model = val_w + grad_w.dot(step) - 0.5 * L * step.squaredNorm();
      if (val_next >= model - 1e-12 * std::max(1.0, std::abs(val_w))) break;
      L *= 2.0;
    }
    if (val_next < val) {
      // Momentum overshoot: restart from the best point.
      t = 1.0;
      w = y;
      val_w = obj.value_and_gradient(w, grad_w);
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const Vector y_prev = y;
    y = y_next;
    val = val_next;
    w = y + ((t - 1.0) / t_next) * (y - y_prev);
    w = obj.set().project(w);
    t = t_next;
    val_w = obj.value_and_gradient(w, grad_w);

    const bool stalled = (y - y_prev).norm() <= 1e-15 * std::max(1.0, y.norm());
    if (it % kCheckEvery == 0 || stalled) {
      obj.value_and_gradient(y, grad);
      const double fw = obj.fw_gap(y, grad);
      if (fw <= tol * std::max(1.0, std::abs(val)) || stalled) {
        out.y = y;
        out.value = val;
        out.fw_gap = fw;
        out.converged = fw <= tol * std::max(1.0, std::abs(val));
        return out;
      }
    }
  }
  obj.value_and_gradient(y, grad);
  out.y = y;
  out.value = val;
  out.fw_gap = obj.fw_gap(y, grad);
  out.converged = out.fw_gap <= tol * std::max(1.0, std::abs(val));
  return out;
}

}  // namespace

GapReport weak_gap(const VectorMap& map, const FeasibleSet& set, const Vector& x, int restarts,
                   double tol, std::uint64_t seed) {
  require_dimension(x, set.dimension(), "weak_gap");
  if (restarts < 0) throw std::invalid_argument("weak_gap: restarts must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("weak_gap: tol must be > 0");

  const WeakGapObjective obj(map, set, x);
  std::vector<Vector> starts;
  starts.reserve(static_cast<std::size_t>(restarts) + 2);
  starts.push_back(set.project(x));
  starts.push_back(strong_gap(map, set, x).certificate);
  Rng rng(seed);
  for (int i = 0; i < restarts; ++i) starts.push_back(set.sample_point(rng));

  double L = map.lipschitz_bound().value_or(1.0);
  L = std::max(L, 1e-12);

  GapReport best;
  best.method = GapMethod::weak_multistart;
  best.restarts = restarts;
  best.tolerance = tol;
  best.value = -std::numeric_limits<double>::infinity();
  for (const Vector& s : starts) {
    double local_L = L;
    const AscentResult r = ascend(obj, s, tol, local_L);
    if (r.value > best.value) {
      best.value = r.value;
      best.certificate = r.y;
      best.converged = r.converged;
      best.fw_gap = r.fw_gap;
    }
  }
  return best;
}

double dist_to_solution(const Vector& x, const Vector& x_star) {
  require_dimension(x, x_star.size(), "dist_to_solution");
  return (x - x_star).norm();
}

RateFit loglog_rate_fit(const std::vector<double>& Ns, const std::vector<double>& gaps) {
  if (Ns.size() != gaps.size()) throw std::invalid_argument("loglog_rate_fit: length mismatch");
  if (Ns.size() < 3) throw std::invalid_argument("loglog_rate_fit: need at least 3 points");
  const std::size_t m = Ns.size();
  std::vector<double> u(m), v(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(Ns[i] > 0.0)) throw std::invalid_argument("loglog_rate_fit: horizons must be > 0");
    if (i > 0 && !(Ns[i] > Ns[i - 1])) {
      throw std::invalid_argument("loglog_rate_fit: horizons must be strictly increasing");
    }
    if (!(gaps[i] > 0.0) || !std::isfinite(gaps[i])) {
      throw std::invalid_argument("loglog_rate_fit: gaps must be positive and finite");
    }
    u[i] = std::log(Ns[i]);
    v[i] = std::log(gaps[i]);
  }
  const double mu = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(m);
  const double mv = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(m);
  double suu = 0.0, suv = 0.0, svv = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    suv += (u[i] - mu) * (v[i] - mv);
    svv += (v[i] - mv) * (v[i] - mv);
  }
  RateFit fit;
  fit.slope = suv / suu;
  fit.intercept = mv - fit.slope * mu;
  if (svv <= 1e-300) {
    fit.r_squared = 1.0;
  } else {
    fit.r_squared = std::clamp(suv * suv / (suu * svv), 0.0, 1.0);
  }
  return fit;
}

double window_bound_ratio(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("window_bound_ratio: lambda must lie in (0, 1)");
  }
  return (1.0 + 1.0 / lambda) * (1.0 + lambda + std::sqrt(lambda)) /
         (1.5 * std::sqrt(2.0) * (3.0 - lambda + 0.5));
}

WindowBounds ub_bounds(double M, double C, double lambda, long N, long ell) {
  if (!(M > 0.0) || !(C > 0.0)) throw std::invalid_argument("ub_bounds: M, C must be > 0");
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("ub_bounds: lambda must lie in (0, 1)");
  }
  const double n = static_cast<double>(N);
  if (!(n > 1.0 / (1.0 - lambda))) throw std::invalid_argument("ub_bounds: need N > 1/(1-lambda)");
  if (ell != window_start_index(lambda, N)) {
    throw std::invalid_argument("ub_bounds: ell must equal ceil(lambda N)");
  }
  const double l = static_cast<double>(ell);
  WindowBounds out;
  out.ub1 = M * C * (1.0 + n / l) / (std::sqrt(n + 1.0) - std::sqrt(l + 1.0));
  out.ub2 = M * C * 3.0 * std::sqrt(2.0) * (3.0 * n - l + 1.0) /
            (2.0 * (std::pow(n, 1.5) - std::pow(l, 1.5)));
  out.h = window_bound_ratio(lambda);
  return out;
}

}  // namespace svi
