#pragma once

// Power-law parameter sequences (stepsize, regularization, smoothing), the
// exponent conditions that guarantee convergence, and related presets.

#include <optional>
#include <string>
#include <vector>

namespace svi {

/// gamma_k = gamma0 (k + 1 + offset)^-a,  eta_k = eta0 (k+1)^-b,
/// eps_k = eps0 (k+1)^-c.
struct PowerLawTriple {
  double gamma0 = 1.0;
  double a = 0.5;
  double eta0 = 0.0;
  double b = 0.0;
  double eps0 = 0.0;
  double c = 0.0;
  double offset = 0.0;

  bool operator==(const PowerLawTriple&) const = default;
};

struct StepParameters {
  double gamma = 0.0;
  double eta = 0.0;
  double eps = 0.0;
};

StepParameters eval(const PowerLawTriple& triple, long k);

struct Violation {
  std::string predicate;  // e.g. "a+3b<1"
  double lhs = 0.0;
  double rhs = 0.0;
};

struct ConditionVerdict {
  bool holds = true;
  std::vector<Violation> violated;
  /// Predicates whose two sides agree to within 1e-12 (boundary cases).
  std::vector<std::string> binding;
};

/// Verdicts per condition set. Each validator fills only the sets it checks.
struct ScheduleVerdict {
  std::optional<ConditionVerdict> as_convergence;
  std::optional<ConditionVerdict> ms_convergence;
  std::optional<ConditionVerdict> averaging_abcr;
  std::optional<ConditionVerdict> least_norm;  // b < c
  /// gamma_k / (eta_k eps_k^2) -> 0, i.e. a > b + 2c (reported by validate_ms).
  std::optional<bool> ratio_vanishes;
};

/// a,b,c > 0; a+3b < 1; a > b+2c; a > 0.5. Also reports b < c.
ScheduleVerdict validate_as(const PowerLawTriple& triple);

/// a,b,c > 0; a+b < 1; a+b <= 2/3 (1+c); a > b+2c.
ScheduleVerdict validate_ms(const PowerLawTriple& triple);

/// a,b,c > 0; a > 0.5; a+3b < 1; b+2c < a; b < c; r <= 1/a.
ScheduleVerdict validate_averaging(const PowerLawTriple& triple, double r);

struct RatePreset {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double r_max = 0.0;  // any r < r_max satisfies the averaging conditions
};

/// Exponents achieving an O(k^-(1/6 - delta)) expected-gap rate.
/// Requires 0 < delta < 1/6 and 0 < delta' < min(delta, (1 - 6 delta)/9).
RatePreset rate_preset(double delta, double delta_prime);

/// gamma_k = 2 M sqrt(1 + 1_r) / (C sqrt(k + 1)), with 1_r = 1 for r < 1.
double window_stepsize(double M, double C, double r, long k);

/// Smallest K with gamma_k/(eta_k eps_k^2) <= 0.5 ((n-1)!!/(n!! kappa C))^2
/// for all k >= K. Informational only; +inf when it exceeds double range and
/// nullopt when the ratio does not decay (a <= b + 2c).
std::optional<double> smoothing_threshold_index(const PowerLawTriple& triple, long n, double C);

struct RegionCell {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  bool as_holds = false;
  bool ms_holds = false;
};

enum class RegionKind { as, ms };

/// Lattice over (0,1)^3 with points i/(resolution+1), i = 1..resolution.
std::vector<RegionCell> feasible_region_grid(int resolution);

/// Same classification over explicit axis values.
std::vector<RegionCell> feasible_region_grid(const std::vector<double>& a_axis,
                                             const std::vector<double>& b_axis,
                                             const std::vector<double>& c_axis);

bool region_holds(const RegionCell& cell, RegionKind which);

/// The (a, b, c) settings S(1)..S(11) of the RSSA sensitivity study, with
/// gamma0 = 1, eta0 = 1e-4, eps0 = 1e-2 and offset 0.1 N for horizon N.
PowerLawTriple rssa_setting(int index, long horizon);

}  // namespace svi
