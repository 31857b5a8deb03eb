#include "svi/metrics.hpp"
#include "svi/solvers.hpp"

#include <doctest.h>

#include <cmath>

using namespace svi;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

// Set without a linear minimization oracle.
class Disk final : public FeasibleSet {
 public:
  Index dimension() const override { return 2; }
  double diameter_bound() const override { return 1.0; }
  SetCapabilities capabilities() const override { return {true, false}; }
  bool contains(const Vector& y, double tol) const override { return y.norm() <= 1.0 + tol; }
  Vector sample_point(Rng&) const override { return Vector::Zero(2); }

 protected:
  Vector do_project(const Vector& x) const override {
    return x.norm() <= 1.0 ? x : Vector(x / x.norm());
  }
};

}  // namespace

TEST_CASE("gap functions: constant map on the unit interval") {
  const Box X(scalar(0.0), scalar(1.0));
  const FunctionMap F(1, [](const Vector&) { return scalar(1.0); }, {}, 0.0, true);
  const GapReport strong = strong_gap(F, X, scalar(0.3));
  CHECK(strong.value == doctest::Approx(0.3));
  CHECK(strong.certificate[0] == 0.0);
  CHECK(strong.method == GapMethod::strong_lp);
  const GapReport weak = weak_gap(F, X, scalar(0.3));
  CHECK(weak.value == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(weak.method == GapMethod::weak_multistart);
  CHECK(weak.converged);
}

TEST_CASE("strong gap needs linear minimization") {
  const Disk X;
  const FunctionMap F(2, [](const Vector& x) { return x; }, {}, 1.0, true);
  CHECK_THROWS_AS(strong_gap(F, X, Vector::Zero(2)), UnsupportedOperation);
}

TEST_CASE("gaps at the reference solution of the standard instance") {
  const CournotGame g = CournotGame::standard_5x4();
  const CournotMap F(g);
  const auto X = g.feasible_set();
  const Vector xs = reference_solution(*X, F);
  CHECK(X->contains(xs, 1e-9));
  const double strong = strong_gap(F, *X, xs).value;
  const double weak = weak_gap(F, *X, xs).value;
  CHECK(strong <= 1e-6);
  CHECK(strong >= -1e-9);
  CHECK(weak <= 1e-4);
  CHECK(weak >= -1e-6);
}

TEST_CASE("gaps of perturbed instances at their reference solutions") {
  Rng rng(70);
  std::uniform_real_distribution<double> U(0.5, 2.0);
  for (int trial = 0; trial < 3; ++trial) {
    CournotGame g;
    g.firms = 2 + trial;
    g.nodes = 2 + (trial % 2);
    g.sigma = 1.0;
    g.a_lb = Vector(g.nodes);
    g.a_ub = Vector(g.nodes);
    g.b = Vector(g.nodes);
    g.c = Vector(g.nodes);
    g.d = Vector::Zero(g.nodes);
    g.cap = Vector(g.nodes);
    for (int j = 0; j < g.nodes; ++j) {
      g.a_lb[j] = 20.0 * U(rng);
      g.a_ub[j] = g.a_lb[j] + 1.0;
      g.b[j] = 0.05 * U(rng);
      g.c[j] = U(rng);
      g.cap[j] = 100.0 * U(rng);
    }
    const CournotMap F(g);
    const auto X = g.feasible_set();
    const Vector xs = reference_solution(*X, F);
    CHECK(strong_gap(F, *X, xs).value <= 1e-6);
    CHECK(weak_gap(F, *X, xs).value <= 1e-4);
  }
}

TEST_CASE("weak gap lies between zero and the strong gap and below 2CM") {
  const CournotGame g = CournotGame::standard_5x4();
  const CournotMap F(g);
  const auto X = g.feasible_set();
  const double bound = 2.0 * bound_C_for_cournot(g, 0.0).C * X->diameter_bound();
  Rng rng(15);
  for (int t = 0; t < 100; ++t) {
    const Vector x = X->sample_point(rng);
    const GapReport strong = strong_gap(F, *X, x);
    const GapReport weak = weak_gap(F, *X, x, 2, 1e-8, 100 + t);
    CHECK(weak.value >= -1e-9);
    CHECK(weak.value <= strong.value + 1e-9 * (1.0 + strong.value));
    CHECK(weak.value <= bound + 1e-6);
    CHECK(strong.value <= bound + 1e-6);
    CHECK(X->contains(weak.certificate, 1e-9));
  }
}

TEST_CASE("more restarts never lowers the weak gap") {
  const CournotGame g = CournotGame::standard_5x4();
  const CournotMap F(g);
  const auto X = g.feasible_set();
  Rng rng(16);
  for (int t = 0; t < 5; ++t) {
    const Vector x = X->sample_point(rng);
    double prev = -INFINITY;
    for (int restarts : {0, 1, 4, 8}) {
      const double v = weak_gap(F, *X, x, restarts).value;
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("distance to solution") {
  CHECK(dist_to_solution(scalar(0.25), scalar(0.25)) == 0.0);
  CHECK(dist_to_solution(scalar(0.0), scalar(0.25)) == doctest::Approx(0.25));
}

TEST_CASE("log-log rate fit") {
  const std::vector<double> Ns{500, 1000, 2000, 4000, 8000};
  std::vector<double> half, sixth, flat;
  for (double N : Ns) {
    half.push_back(3.0 / std::sqrt(N));
    sixth.push_back(std::pow(N, -1.0 / 6.0));
    flat.push_back(0.7);
  }
  const RateFit f = loglog_rate_fit(Ns, half);
  CHECK(f.slope == doctest::Approx(-0.5));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(loglog_rate_fit(Ns, sixth).slope == doctest::Approx(-1.0 / 6.0));
  CHECK(loglog_rate_fit(Ns, flat).slope == doctest::Approx(0.0));

  const RateFit noisy = loglog_rate_fit(Ns, {1.0, 0.3, 0.5, 0.1, 0.2});
  CHECK(noisy.r_squared >= 0.0);
  CHECK(noisy.r_squared <= 1.0);

  CHECK_THROWS_AS(loglog_rate_fit({1, 2}, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(loglog_rate_fit({1, 2, 3}, {1, 0, 1}), std::invalid_argument);
}

TEST_CASE("window bounds") {
  CHECK(window_bound_ratio(0.602) == doctest::Approx(1.029).epsilon(0.005 / 1.029));
  for (int i = 1; i <= 19; ++i) {
    const double lambda = 0.05 * i;
    CAPTURE(lambda);
    CHECK(window_bound_ratio(lambda) > 1.0);
  }
  const WindowBounds b = ub_bounds(1.0, 1.0, 0.5, 100, 50);
  CHECK(b.ub2 < b.ub1);
  CHECK(b.ub1 == doctest::Approx(3.0 / (std::sqrt(101.0) - std::sqrt(51.0))));
  CHECK(b.ub2 ==
        doctest::Approx(3.0 * std::sqrt(2.0) * 251.0 / (2.0 * (1000.0 - std::pow(50.0, 1.5)))));
  CHECK_THROWS_AS(ub_bounds(1, 1, 0.5, 100, 49), std::invalid_argument);
  CHECK_THROWS_AS(ub_bounds(1, 1, 1.0, 100, 100), std::invalid_argument);
  CHECK_THROWS_AS(ub_bounds(1, 1, 0.5, 2, 1), std::invalid_argument);
}
