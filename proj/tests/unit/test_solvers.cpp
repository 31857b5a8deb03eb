#include "svi/metrics.hpp"
#include "svi/solvers.hpp"

#include <doctest.h>

#include <cmath>

using namespace svi;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

std::shared_ptr<Box> interval(double lo, double hi) {
  return std::make_shared<Box>(scalar(lo), scalar(hi));
}

DeterministicOracle affine_oracle_1d(double slope, double shift, double C = 10.0) {
  auto map = std::make_shared<FunctionMap>(
      1, [=](const Vector& x) { return Vector(slope * x.array() + shift); },
      [=](const Vector&, const Vector& v) { return Vector(slope * v); }, std::abs(slope), true);
  return DeterministicOracle(map, C, 0.0);
}

SolverConfig cournot_config(Scheme scheme, PowerLawTriple t, long N, Index n) {
  SolverConfig cfg;
  cfg.scheme = scheme;
  cfg.schedule = t;
  cfg.horizon = N;
  cfg.start = Vector::Zero(n);
  return cfg;
}

}  // namespace

TEST_CASE("single step examples") {
  const auto X = interval(0.0, 10.0);
  SUBCASE("zero map keeps a feasible point") {
    const auto oracle = affine_oracle_1d(0.0, 0.0);
    IterateState st{0, scalar(3.0), Rng(1)};
    rssa_step(st, oracle, *X, 0.7, 0.0, 0.0);
    CHECK(st.x[0] == 3.0);
    CHECK(st.k == 1);
  }
  SUBCASE("constant map with regularizer") {
    const auto oracle = affine_oracle_1d(0.0, 2.0);
    IterateState st{0, scalar(1.0), Rng(1)};
    rssa_step(st, oracle, *X, 0.5, 0.1, 0.0);
    // 1 - 0.5 (2 + 0.1) = -0.05 -> 0
    CHECK(st.x[0] == 0.0);
  }
  SUBCASE("non-finite sample poisons the path") {
    auto map = std::make_shared<FunctionMap>(1, [](const Vector&) { return scalar(NAN); });
    const DeterministicOracle oracle(map, 1.0, 0.0);
    IterateState st{4, scalar(1.0), Rng(1)};
    try {
      rssa_step(st, oracle, *X, 0.5, 0.0, 0.0);
      FAIL("expected PoisonedState");
    } catch (const PoisonedState& e) {
      CHECK(e.iteration() == 4);
    }
  }
}

TEST_CASE("weighted averaging examples") {
  auto run = [](double r) {
    AveragingState avg;
    avg.accumulate(1.0, scalar(1.0), r);
    avg.accumulate(0.5, scalar(3.0), r);
    return avg.average()[0];
  };
  CHECK(run(1.0) == doctest::Approx(5.0 / 3.0));
  CHECK(run(-1.0) == doctest::Approx(7.0 / 3.0));
  CHECK(run(0.0) == doctest::Approx(2.0));

  AveragingState avg;
  avg.accumulate(1.0, scalar(1.0), 1.0);
  CHECK_THROWS_AS(avg.accumulate(1.0, scalar(1.0), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(AveragingState{}.average(), std::logic_error);
}

TEST_CASE("averaging with tiny stepsizes and r = -1 stays accurate") {
  AveragingState avg;
  for (long t = 0; t < 100000; ++t) {
    const double gamma = 1e-200 / std::sqrt(t + 1.0);
    avg.accumulate(gamma, scalar(t % 2 == 0 ? 1.0 : -1.0), -1.0);
  }
  // weights sqrt(t+1): alternating sums nearly cancel
  double num = 0.0, den = 0.0;
  for (long t = 0; t < 100000; ++t) {
    const double w = std::sqrt(t + 1.0);
    num += (t % 2 == 0 ? 1.0 : -1.0) * w;
    den += w;
  }
  CHECK(std::isfinite(avg.average()[0]));
  CHECK(avg.average()[0] == doctest::Approx(num / den).epsilon(1e-9));
}

TEST_CASE("window average") {
  WindowBuffer buf(0);
  buf.push(0, 1.0, scalar(0.0));
  buf.push(1, 1.0, scalar(3.0));
  buf.push(2, 1.0, scalar(6.0));
  for (double r : {-1.0, 0.0, 1.0, 2.5}) CHECK(window_average(buf, 1, 2, r)[0] == doctest::Approx(4.5));
  CHECK(window_average(buf, 2, 2, 1.0)[0] == 6.0);
  CHECK_THROWS_AS(window_average(buf, 2, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(buf.push(4, 1.0, scalar(0.0)), std::invalid_argument);

  WindowBuffer late(5);
  late.push(3, 1.0, scalar(9.0));  // dropped
  CHECK(late.size() == 0);
  CHECK_THROWS_AS(window_average(late, 4, 5, 1.0), std::invalid_argument);
}

TEST_CASE("window average with l = 0 equals the streaming average bitwise") {
  Rng rng(2);
  std::normal_distribution<double> N;
  WindowBuffer buf(0);
  AveragingState avg;
  for (long t = 0; t < 500; ++t) {
    const double gamma = 0.3 / std::sqrt(t + 1.0);
    Vector x(3);
    for (int i = 0; i < 3; ++i) x[i] = N(rng);
    buf.push(t, gamma, x);
    avg.accumulate(gamma, x, -1.0);
  }
  CHECK(window_average(buf, 0, 499, -1.0) == avg.average());
}

TEST_CASE("tikhonov solve examples") {
  SUBCASE("interior root") {
    const auto X = interval(0.0, 1.0);
    const auto oracle = affine_oracle_1d(1.0, -2.0);
    const TrajectoryPoint p = tikhonov_solve(*X, oracle, MapKind::exact, 1.0, 0.0, 1e-12);
    CHECK(p.s[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.residual <= 1e-12);
  }
  SUBCASE("regularizer alone") {
    const auto X = interval(-1.0, 1.0);
    const auto oracle = affine_oracle_1d(0.0, 0.0);
    ExtragradientOptions opt;
    opt.lipschitz = 1.0;
    opt.warm_start = scalar(0.8);
    const TrajectoryPoint p = tikhonov_solve(*X, oracle, MapKind::exact, 1.0, 0.0, 1e-12, opt);
    CHECK(std::abs(p.s[0]) <= 1e-10);
  }
  SUBCASE("boundary solution") {
    const auto X = interval(0.0, 1.0);
    const auto oracle = affine_oracle_1d(1.0, 5.0);
    const TrajectoryPoint p = tikhonov_solve(*X, oracle, MapKind::exact, 1.0, 0.0, 1e-12);
    CHECK(p.s[0] == 0.0);
  }
  SUBCASE("errors") {
    const auto X = interval(0.0, 1.0);
    const auto oracle = affine_oracle_1d(1.0, 5.0);
    CHECK_THROWS_AS(tikhonov_solve(*X, oracle, MapKind::exact, 0.0, 0.0, 1e-8),
                    std::invalid_argument);
    ExtragradientOptions opt;
    opt.max_iterations = 1;
    opt.warm_start = scalar(1.0);
    const auto slow = affine_oracle_1d(1.0, -0.5);
    try {
      tikhonov_solve(*X, slow, MapKind::exact, 1e-3, 0.0, 1e-14, opt);
      FAIL("expected ConvergenceFailure");
    } catch (const ConvergenceFailure& e) {
      CHECK(e.last_residual() > 0.0);
      CHECK(e.iterations() == 1);
    }
  }
}

TEST_CASE("tikhonov solution satisfies the variational inequality") {
  const CournotGame g = CournotGame::standard_5x4();
  const CournotOracle oracle(g, 0.0);
  const auto X = g.feasible_set();
  const CournotMap F(g);
  const double eta = 1e-2;
  const double tol = 1e-9;
  const TrajectoryPoint p = tikhonov_solve(*X, oracle, MapKind::exact, eta, 0.0, tol);
  const Vector G = F.evaluate(p.s) + eta * p.s;
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const Vector y = X->sample_point(rng);
    // The residual bound translates into a slack of order (L + eta) tol per unit distance.
    CHECK((y - p.s).dot(G) >= -1e-6 * (y - p.s).norm());
  }
}

TEST_CASE("reference solution") {
  const auto X = interval(0.0, 1.0);
  auto map = std::make_shared<FunctionMap>(
      1, [](const Vector& x) { return Vector(x.array() - 0.25); },
      FunctionMap::JacTFn{}, 1.0, true);
  CHECK(reference_solution(*X, *map)[0] == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("solver config validation") {
  const Index n = 40;
  CHECK_NOTHROW(cournot_config(Scheme::SA, {1, 0.5, 0, 0, 0, 0, 0}, 10, n).validate());
  CHECK_THROWS_AS(cournot_config(Scheme::SA, {1, 0.5, 1e-3, 0.1, 0, 0, 0}, 10, n).validate(),
                  std::invalid_argument);
  CHECK_NOTHROW(cournot_config(Scheme::RSA, {1, 0.5, 1e-3, 0.1, 0, 0, 0}, 10, n).validate());
  CHECK_THROWS_AS(cournot_config(Scheme::RSA, {1, 0.5, 1e-3, 0.1, 1e-2, 0.1, 0}, 10, n).validate(),
                  std::invalid_argument);
  CHECK_NOTHROW(cournot_config(Scheme::RSSA, {1, 0.5, 1e-3, 0.1, 1e-2, 0.1, 0}, 10, n).validate());
  CHECK_THROWS_AS(cournot_config(Scheme::RSSA, {1, 0.5, 1e-3, 0.1, 0, 0, 0}, 10, n).validate(),
                  std::invalid_argument);

  SolverConfig bad = cournot_config(Scheme::SA, {1, 0.5, 0, 0, 0, 0, 0}, 10, n);
  bad.ticks = {3, 3};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.ticks = {11};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  SolverConfig win = cournot_config(Scheme::RSA, {1, 0.5, 1e-3, 0.1, 0, 0, 0}, 10, n);
  win.schedule = WindowStepRule{1.0, 1.0, -1.0};
  CHECK_THROWS_AS(win.validate(), std::invalid_argument);

  CHECK(window_start_index(0.3, 1000) == 300);
  CHECK(window_start_index(0.25, 10) == 3);
  CHECK(window_start_index(1.0, 7) == 7);
  CHECK(parse_scheme("RSSA") == Scheme::RSSA);
  CHECK_THROWS_AS(parse_scheme("rssa_w"), std::invalid_argument);
}

TEST_CASE("paths: start, feasibility and determinism") {
  const CournotGame g = CournotGame::standard_5x4();
  const auto X = g.feasible_set();
  const PowerLawTriple t = rssa_setting(1, 300);
  const CournotOracle oracle(g, t.eps0);

  SolverConfig zero = cournot_config(Scheme::RSSA, t, 0, g.dimension());
  zero.start = Vector::Constant(g.dimension(), -4.0);
  const PathRecord r0 = run_path(zero, oracle, *X, 5);
  REQUIRE(r0.checkpoints.size() == 1);
  CHECK(r0.checkpoints[0].x == X->project(zero.start));
  CHECK(r0.checkpoints[0].average == r0.checkpoints[0].x);
  CHECK_FALSE(r0.checkpoints[0].next.has_value());

  SolverConfig cfg = cournot_config(Scheme::RSSA, t, 300, g.dimension());
  cfg.window_lambda = 0.5;
  for (long k = 0; k <= 300; k += 10) cfg.ticks.push_back(k);
  const PathRecord a = run_path(cfg, oracle, *X, 9);
  const PathRecord b = run_path(cfg, oracle, *X, 9);
  REQUIRE(a.checkpoints.size() == 31);
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
    const Checkpoint& ca = a.checkpoints[i];
    CHECK(ca.x == b.checkpoints[i].x);
    CHECK(X->contains(ca.x, 1e-9));
    CHECK(X->contains(ca.average, 1e-9));
    CHECK(ca.window.has_value() == (ca.k >= 150));
    if (ca.window) CHECK(X->contains(*ca.window, 1e-9));
    CHECK(ca.next.has_value() == (ca.k < 300));
  }
  const PathRecord c = run_path(cfg, oracle, *X, 10);
  CHECK(c.checkpoints.back().x != a.checkpoints.back().x);
}

TEST_CASE("window lambda = 1 gives the last iterate, lambda = 0 the full average") {
  const CournotGame g = CournotGame::standard_5x4();
  const auto X = g.feasible_set();
  const CournotOracle oracle(g, 0.0);
  SolverConfig cfg;
  cfg.scheme = Scheme::SA;
  cfg.schedule = WindowStepRule{X->diameter_bound(), oracle.bound_C(), -1.0};
  cfg.r = -1.0;
  cfg.horizon = 200;
  cfg.start = Vector::Zero(g.dimension());
  cfg.window_lambda = 1.0;
  const Checkpoint last = run_path(cfg, oracle, *X, 3).checkpoints.back();
  CHECK(*last.window == last.x);
  cfg.window_lambda = 0.0;
  const Checkpoint full = run_path(cfg, oracle, *X, 3).checkpoints.back();
  CHECK(*full.window == full.average);
}

TEST_CASE("degenerate schemes coincide bitwise") {
  const CournotGame g = CournotGame::standard_5x4();
  const auto X = g.feasible_set();
  const CournotOracle oracle(g, 0.0);
  const long N = 200;

  // Plain SA through the config path vs the general step with eta = eps = 0.
  SolverConfig sa = cournot_config(Scheme::SA, {1.0, 0.6, 0, 0, 0, 0, 20.0}, N, g.dimension());
  const PathRecord rec = run_path(sa, oracle, *X, 42);
  IterateState st{0, X->project(sa.start), Rng(42)};
  for (long k = 0; k < N; ++k) {
    rssa_step(st, oracle, *X, eval({1.0, 0.6, 0, 0, 0, 0, 20.0}, k).gamma, 0.0, 0.0);
  }
  CHECK(st.x == rec.checkpoints.back().x);

  // Regularized scheme vs the smoothed step with a zero radius.
  const PowerLawTriple rsa{1.0, 0.6, 1e-3, 0.2, 0, 0, 20.0};
  const PathRecord rec2 = run_path(cournot_config(Scheme::RSA, rsa, N, g.dimension()), oracle,
                                   *X, 43);
  IterateState st2{0, Vector::Zero(g.dimension()), Rng(43)};
  for (long k = 0; k < N; ++k) {
    const StepParameters p = eval(rsa, k);
    rssa_step(st2, oracle, *X, p.gamma, p.eta, 0.0);
  }
  CHECK(st2.x == rec2.checkpoints.back().x);
}

TEST_CASE("tracking error from the regularized solution") {
  const CournotGame g = CournotGame::standard_5x4();
  const auto X = g.feasible_set();
  const CournotOracle oracle(g, 0.0);
  auto det_map = std::make_shared<CournotMap>(g);
  const DeterministicOracle det(det_map, oracle.bound_C(), 1e-2);

  // Frozen schedule (all exponents zero), start at s_0.
  const PowerLawTriple frozen{1e-3, 0.0, 1e-2, 0.0, 1e-2, 0.0, 0.0};
  const TrajectoryPoint s0 = tikhonov_solve(*X, det, MapKind::exact, 1e-2, 1e-2, 1e-10);
  SolverConfig cfg = cournot_config(Scheme::RSSA, frozen, 1, g.dimension());
  cfg.start = s0.s;
  cfg.ticks = {0};
  const PathRecord rec = run_path(cfg, det, *X, 1);
  const double step = (*rec.checkpoints[0].next - s0.s).norm();
  // Only the ball perturbation moves x off the fixed point: ||x1 - s0|| <= gamma L eps.
  CHECK(step <= 1e-3 * (det_map->lipschitz_bound().value() * 1e-2) * 1.0001 + 1e-9);

  const auto series = trajectory_gap_series(rec, frozen, det, *X, 1e-10);
  REQUIRE(series.size() == 1);
  CHECK(series[0].k == 0);
  CHECK(series[0].sq_error == doctest::Approx(step * step).epsilon(1e-6));
  CHECK(series[0].bound_ratio == doctest::Approx(1e-3 / (1e-2 * 1e-4)));

  CHECK_THROWS_AS(trajectory_gap_series(rec, {1, 0.5, 0, 0, 0, 0, 0}, det, *X, 1e-8),
                  std::invalid_argument);
}
