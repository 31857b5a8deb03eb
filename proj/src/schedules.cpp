#include "svi/schedules.hpp"

#include "svi/oracles.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace svi {

namespace {

constexpr double kBindingTol = 1e-12;

class VerdictBuilder {
 public:
  // lhs < rhs
  VerdictBuilder& less(const char* name, double lhs, double rhs) {
    record(name, lhs, rhs, lhs < rhs);
    return *this;
  }
  // lhs <= rhs; rounding at the boundary counts as equality
  VerdictBuilder& less_equal(const char* name, double lhs, double rhs) {
    record(name, lhs, rhs, lhs <= rhs + kBindingTol);
    return *this;
  }
  ConditionVerdict done() { return std::move(verdict_); }

 private:
  void record(const char* name, double lhs, double rhs, bool ok) {
    if (std::abs(lhs - rhs) <= kBindingTol) verdict_.binding.emplace_back(name);
    if (!ok) {
      verdict_.holds = false;
      verdict_.violated.push_back({name, lhs, rhs});
    }
  }
  ConditionVerdict verdict_;
};

void positivity(VerdictBuilder& v, const PowerLawTriple& t) {
  v.less("a>0", 0.0, t.a).less("b>0", 0.0, t.b).less("c>0", 0.0, t.c);
}

ConditionVerdict least_norm_verdict(const PowerLawTriple& t) {
  VerdictBuilder v;
  v.less("b<c", t.b, t.c);
  return v.done();
}

}  // namespace

StepParameters eval(const PowerLawTriple& t, long k) {
  if (k < 0) throw std::invalid_argument("eval: k must be nonnegative");
  const double kp1 = static_cast<double>(k) + 1.0;
  StepParameters p;
  p.gamma = t.gamma0 * std::pow(kp1 + t.offset, -t.a);
  p.eta = t.eta0 == 0.0 ? 0.0 : t.eta0 * std::pow(kp1, -t.b);
  p.eps = t.eps0 == 0.0 ? 0.0 : t.eps0 * std::pow(kp1, -t.c);
  return p;
}

ScheduleVerdict validate_as(const PowerLawTriple& t) {
  VerdictBuilder v;
  positivity(v, t);
  v.less("a+3b<1", t.a + 3.0 * t.b, 1.0)
      .less("a>b+2c", t.b + 2.0 * t.c, t.a)
      .less("a>0.5", 0.5, t.a);
  ScheduleVerdict out;
  out.as_convergence = v.done();
  out.least_norm = least_norm_verdict(t);
  return out;
}

ScheduleVerdict validate_ms(const PowerLawTriple& t) {
  VerdictBuilder v;
  positivity(v, t);
  v.less("a+b<1", t.a + t.b, 1.0)
      .less_equal("a+b<=2/3(1+c)", t.a + t.b, 2.0 / 3.0 * (1.0 + t.c))
      .less("a>b+2c", t.b + 2.0 * t.c, t.a);
  ScheduleVerdict out;
  out.ms_convergence = v.done();
  out.least_norm = least_norm_verdict(t);
  out.ratio_vanishes = t.a > t.b + 2.0 * t.c;
  return out;
}

ScheduleVerdict validate_averaging(const PowerLawTriple& t, double r) {
  VerdictBuilder v;
  positivity(v, t);
  v.less("a>0.5", 0.5, t.a)
      .less("a+3b<1", t.a + 3.0 * t.b, 1.0)
      .less("b+2c<a", t.b + 2.0 * t.c, t.a)
      .less("b<c", t.b, t.c)
      .less_equal("r<=1/a", r, t.a > 0.0 ? 1.0 / t.a : std::numeric_limits<double>::infinity());
  ScheduleVerdict out;
  out.averaging_abcr = v.done();
  out.least_norm = least_norm_verdict(t);
  return out;
}

RatePreset rate_preset(double delta, double delta_prime) {
  if (!(delta > 0.0 && delta < 1.0 / 6.0)) {
    throw std::invalid_argument("rate_preset: violated 0 < delta < 1/6");
  }
  if (!(delta_prime > 0.0)) throw std::invalid_argument("rate_preset: violated delta' > 0");
  if (!(delta_prime < delta)) throw std::invalid_argument("rate_preset: violated delta' < delta");
  if (!(delta_prime < (1.0 - 6.0 * delta) / 9.0)) {
    throw std::invalid_argument("rate_preset: violated delta' < (1 - 6 delta)/9");
  }
  RatePreset p;
  p.a = 0.5 + 3.0 * (delta - delta_prime);
  p.b = 1.0 / 6.0 - delta;
  p.c = 1.0 / 6.0;
  p.r_max = (0.5 - 3.0 * (delta - delta_prime)) / (0.5 + 3.0 * (delta - delta_prime));
  return p;
}

double window_stepsize(double M, double C, double r, long k) {
  if (!(M > 0.0) || !(C > 0.0)) throw std::invalid_argument("window_stepsize: M, C must be > 0");
  if (k < 0) throw std::invalid_argument("window_stepsize: k must be nonnegative");
  const double indicator = r < 1.0 ? 1.0 : 0.0;
  return 2.0 * M * std::sqrt(1.0 + indicator) / (C * std::sqrt(static_cast<double>(k) + 1.0));
}

std::optional<double> smoothing_threshold_index(const PowerLawTriple& t, long n, double C) {
  if (!(t.eta0 > 0.0) || !(t.eps0 > 0.0) || !(t.gamma0 > 0.0)) return std::nullopt;
  const double decay = t.a - t.b - 2.0 * t.c;
  if (!(decay > 0.0)) return std::nullopt;
  const double kappa = (n % 2 == 1) ? 1.0 : 2.0 / std::numbers::pi;
  const double log_threshold =
      std::log(0.5) - 2.0 * std::log(kappa * double_factorial_ratio(n) * C);

  // log of the ratio as a function of u = log(k + 1).
  auto log_ratio = [&](double u) {
    const double kp1 = std::exp(u);
    return std::log(t.gamma0) - std::log(t.eta0) - 2.0 * std::log(t.eps0) -
           t.a * std::log(kp1 + t.offset) + (t.b + 2.0 * t.c) * u;
  };
  // With an offset the ratio first rises; it decreases past this point.
  double u_lo = 0.0;
  if (t.offset > 0.0) u_lo = std::max(0.0, std::log((t.b + 2.0 * t.c) * t.offset / decay));
  if (log_ratio(u_lo) <= log_threshold) return u_lo == 0.0 ? 0.0 : std::ceil(std::exp(u_lo) - 1.0);

  double u_hi = u_lo + 1.0;
  while (log_ratio(u_hi) > log_threshold) {
    u_hi = u_lo + 2.0 * (u_hi - u_lo);
    if (u_hi > 700.0) return std::numeric_limits<double>::infinity();
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (u_lo + u_hi);
    if (log_ratio(mid) > log_threshold) {
      u_lo = mid;
    } else {
      u_hi = mid;
    }
  }
  return std::ceil(std::exp(u_hi) - 1.0);
}

std::vector<RegionCell> feasible_region_grid(const std::vector<double>& a_axis,
                                             const std::vector<double>& b_axis,
                                             const std::vector<double>& c_axis) {
  std::vector<RegionCell> cells;
  cells.reserve(a_axis.size() * b_axis.size() * c_axis.size());
  for (double a : a_axis) {
    for (double b : b_axis) {
      for (double c : c_axis) {
        const PowerLawTriple t{1.0, a, 1.0, b, 1.0, c, 0.0};
        cells.push_back({a, b, c, validate_as(t).as_convergence->holds,
                         validate_ms(t).ms_convergence->holds});
      }
    }
  }
  return cells;
}

std::vector<RegionCell> feasible_region_grid(int resolution) {
  if (resolution < 2) throw std::invalid_argument("feasible_region_grid: resolution must be >= 2");
  std::vector<double> axis;
  axis.reserve(static_cast<std::size_t>(resolution));
  for (int i = 1; i <= resolution; ++i) axis.push_back(static_cast<double>(i) / (resolution + 1));
  return feasible_region_grid(axis, axis, axis);
}

bool region_holds(const RegionCell& cell, RegionKind which) {
  return which == RegionKind::as ? cell.as_holds : cell.ms_holds;
}

PowerLawTriple rssa_setting(int index, long horizon) {
  static constexpr std::array<std::array<double, 3>, 11> kSettings{{
      {0.501, 0.099, 0.200},
      {0.600, 0.099, 0.200},
      {0.700, 0.099, 0.200},
      {0.501, 0.100, 0.167},
      {0.501, 0.130, 0.167},
      {0.501, 0.166, 0.167},
      {0.501, 0.166, 0.130},
      {0.501, 0.166, 0.100},
      {0.501, 0.166, 0.167},
      {0.401, 0.200, 0.100},
      {0.600, 0.133, 0.099},
  }};
  if (index < 1 || index > 11) throw std::invalid_argument("rssa_setting: index must be 1..11");
  const auto& abc = kSettings[static_cast<std::size_t>(index - 1)];
  return PowerLawTriple{1.0, abc[0], 1e-4, abc[1], 1e-2, abc[2], 0.1 * static_cast<double>(horizon)};
}

}  // namespace svi
