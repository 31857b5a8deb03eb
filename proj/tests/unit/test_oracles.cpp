#include "svi/oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace svi;

namespace {

// Firm i's cost minus revenue, written directly from the market model.
double firm_loss(const CournotGame& g, const Vector& x, int firm, const Vector& a) {
  double loss = 0.0;
  for (int j = 0; j < g.nodes; ++j) {
    double total = 0.0;
    for (int f = 0; f < g.firms; ++f) total += x[g.s_index(f, j)];
    const double price = a[j] - g.b[j] * std::pow(total, g.sigma);
    loss += g.c[j] * x[g.g_index(firm, j)] + g.d[j] - price * x[g.s_index(firm, j)];
  }
  return loss;
}

Vector random_point(const FeasibleSet& set, Rng& rng) { return set.sample_point(rng); }

// Oracle with noise but no closed-form mean.
class OpaqueOracle final : public StochasticMapOracle {
 public:
  Index dimension() const override { return 1; }
  Vector sample(const Vector& x, Rng& rng) const override {
    std::normal_distribution<double> n;
    return x + Vector::Constant(1, n(rng));
  }
  double bound_C() const override { return 1.0; }
  double extension_radius() const override { return 0.0; }
};

}  // namespace

TEST_CASE("standard instance parameters") {
  const CournotGame g = CournotGame::standard_5x4();
  CHECK(g.firms == 5);
  CHECK(g.nodes == 4);
  CHECK(g.sigma == 1.0);
  CHECK(g.dimension() == 40);
  for (int j = 0; j < 4; ++j) {
    CHECK(g.a_lb[j] == 49.5);
    CHECK(g.a_ub[j] == 50.5);
    CHECK(g.b[j] == 0.05);
    CHECK(g.c[j] == 1.5);
    CHECK(g.d[j] == 0.0);
    CHECK(g.cap[j] == 300.0);
  }
}

TEST_CASE("expected map at the origin matches finite differences of the firm losses") {
  const CournotGame g = CournotGame::standard_5x4();
  const Vector x0 = Vector::Zero(g.dimension());
  const Vector F = cournot_expected_map(g, x0);
  for (int i = 0; i < g.firms; ++i) {
    for (int j = 0; j < g.nodes; ++j) {
      CHECK(F[g.g_index(i, j)] == doctest::Approx(1.5));
      CHECK(F[g.s_index(i, j)] == doctest::Approx(-50.0));
    }
  }

  Rng rng(4);
  const auto set = g.feasible_set();
  const Vector abar = g.mean_intercept();
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = random_point(*set, rng);
    const Vector Fx = cournot_expected_map(g, x);
    for (int i = 0; i < g.firms; ++i) {
      for (Index k = 0; k < 2 * g.nodes; ++k) {
        const Index idx = g.g_index(i, 0) + k;
        const double h = 1e-4;
        Vector xp = x, xm = x;
        xp[idx] += h;
        xm[idx] -= h;
        const double fd = (firm_loss(g, xp, i, abar) - firm_loss(g, xm, i, abar)) / (2 * h);
        CHECK(Fx[idx] == doctest::Approx(fd).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("degenerate intercept distribution makes samples exact") {
  CournotGame g = CournotGame::standard_5x4();
  g.a_lb = g.a_ub = Vector::Constant(4, 50.0);
  Rng rng(1), pts(2);
  const auto set = g.feasible_set();
  for (int t = 0; t < 10; ++t) {
    const Vector x = random_point(*set, pts);
    CHECK((cournot_sample_map(g, x, rng) - cournot_expected_map(g, x)).norm() == 0.0);
  }
}

TEST_CASE("cournot map is monotone; strictly so in the sales block") {
  const CournotGame g = CournotGame::standard_5x4();
  const CournotMap F(g);
  const auto set = g.feasible_set();
  Rng rng(9);
  for (int t = 0; t < 10000; ++t) {
    const Vector x = random_point(*set, rng);
    const Vector y = random_point(*set, rng);
    const double inner = (F.evaluate(x) - F.evaluate(y)).dot(x - y);
    CHECK(inner >= -1e-9);
    double ds = 0.0;
    for (int i = 0; i < g.firms; ++i) {
      for (int j = 0; j < g.nodes; ++j) {
        const double d = x[g.s_index(i, j)] - y[g.s_index(i, j)];
        ds += d * d;
      }
    }
    if (ds > 1e-12) CHECK(inner > 0.0);
  }

  // Symmetric part of the Jacobian: PSD overall, PD on the sales coordinates.
  const auto [A, q] = F.affine_form();
  const Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
  std::vector<Index> sales;
  for (int i = 0; i < g.firms; ++i) {
    for (int j = 0; j < g.nodes; ++j) sales.push_back(g.s_index(i, j));
  }
  Eigen::MatrixXd Ss(sales.size(), sales.size());
  for (std::size_t r = 0; r < sales.size(); ++r) {
    for (std::size_t c = 0; c < sales.size(); ++c) Ss(r, c) = S(sales[r], sales[c]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_s(Ss);
  CHECK(eig_s.eigenvalues().minCoeff() > 1e-6);

  for (int t = 0; t < 5; ++t) {
    const Vector x = random_point(*set, rng);
    CHECK((A * x + q - F.evaluate(x)).norm() <= 1e-9 * (1 + F.evaluate(x).norm()));
  }
}

TEST_CASE("sample mean is unbiased at 3 standard errors") {
  const CournotGame g = CournotGame::standard_5x4();
  const CournotOracle oracle(g, 0.0);
  const auto set = g.feasible_set();
  Rng pts(31), rng(32);
  int outside = 0, total = 0;
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_point(*set, pts);
    const NoiseStats st = noise_moments(oracle, x, 10000, rng);
    for (Index i = 0; i < st.mean_vector.size(); ++i) {
      if (st.mean_std_error[i] == 0.0) {
        CHECK(st.mean_vector[i] == doctest::Approx(0.0).epsilon(1e-12));
        continue;
      }
      ++total;
      if (std::abs(st.mean_vector[i]) > 3.0 * st.mean_std_error[i]) ++outside;
    }
  }
  // Sales coordinates of one node share a draw, so only 4 of each 40 are
  // independent; about 0.27% of comparisons exceed 3 s.e. by chance.
  CHECK(total > 0);
  CHECK(outside <= total / 50);
}

TEST_CASE("noise second moment equals firms * nodes * Var(a)") {
  const CournotGame g = CournotGame::standard_5x4();
  const CournotOracle oracle(g, 0.0);
  Rng rng(77);
  const NoiseStats st = noise_moments(oracle, Vector::Zero(g.dimension()), 10000, rng);
  CHECK(st.sample_count == 10000);
  CHECK(std::isfinite(st.mean_sq_norm));
  const double expected = 20.0 * (1.0 / 12.0);  // 5/3
  CHECK(std::abs(st.mean_sq_norm - expected) <= 3.0 * st.sq_norm_std_error);
  CHECK(st.mean_vector.norm() <= 3.0 * st.mean_std_error.norm());
}

TEST_CASE("noise diagnostics on deterministic and opaque oracles") {
  auto map = std::make_shared<FunctionMap>(2, [](const Vector& x) { return Vector(2.0 * x); });
  const DeterministicOracle det(map, 1.0, 0.0);
  Rng rng(1);
  const NoiseStats st = noise_moments(det, Vector::Ones(2), 100, rng);
  CHECK(st.mean_vector.norm() == 0.0);
  CHECK(st.mean_sq_norm == 0.0);

  const OpaqueOracle opaque;
  CHECK_THROWS_AS(noise_moments(opaque, Vector::Zero(1), 100, rng), UnsupportedOperation);
}

TEST_CASE("bound C") {
  SUBCASE("zero map") {
    CournotGame g = CournotGame::standard_5x4();
    g.b.setZero();
    g.c.setZero();
    g.a_lb.setZero();
    g.a_ub.setZero();
    CHECK(bound_C_for_cournot(g, 0.0).C == 0.0);
  }
  SUBCASE("certifies random samples over X") {
    const CournotGame g = CournotGame::standard_5x4();
    const CBound cb = bound_C_for_cournot(g, 0.0);
    CHECK_FALSE(cb.sampled);
    const auto set = g.feasible_set();
    Rng rng(8);
    double worst = 0.0;
    for (int t = 0; t < 100000; ++t) {
      const Vector x = random_point(*set, rng);
      worst = std::max(worst, cournot_sample_map(g, x, rng).norm());
    }
    CHECK(worst <= cb.C);
    CHECK(cournot_expected_map(g, Vector::Zero(g.dimension())).norm() <= cb.C);
  }
  SUBCASE("nondecreasing in capacity and radius") {
    CournotGame g = CournotGame::standard_5x4();
    const double c1 = bound_C_for_cournot(g, 0.0).C;
    CHECK(bound_C_for_cournot(g, 0.5).C >= c1);
    g.cap *= 2.0;
    CHECK(bound_C_for_cournot(g, 0.0).C >= c1);
  }
  SUBCASE("sigma above one falls back to sampling") {
    CournotGame g = CournotGame::standard_5x4();
    g.sigma = 1.5;
    const CBound cb = bound_C_for_cournot(g, 0.0);
    CHECK(cb.sampled);
    CHECK(cb.C > 0.0);
  }
}

TEST_CASE("smoothing Lipschitz constant") {
  CHECK(smoothing_lipschitz_constant(1, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(smoothing_lipschitz_constant(2, 1.0, 1.0) == doctest::Approx(4.0 / std::numbers::pi));
  CHECK(smoothing_lipschitz_constant(5, 2.0, 0.5) == doctest::Approx(7.5));
  CHECK_THROWS_AS(smoothing_lipschitz_constant(3, 1.0, 0.0), std::domain_error);
  CHECK(double_factorial_ratio(4) == doctest::Approx(8.0 / 3.0));
  // Grows like sqrt(n) and stays finite far beyond factorial overflow.
  const double big = double_factorial_ratio(100000);
  CHECK(std::isfinite(big));
  CHECK(big / std::sqrt(100000.0) == doctest::Approx(std::sqrt(std::numbers::pi / 2.0)).epsilon(1e-3));
}

TEST_CASE("smoothed estimate: zero radius and affine map") {
  const CournotGame g = CournotGame::standard_5x4();
  const CournotOracle oracle(g, 0.5);
  const auto set = g.feasible_set();
  Rng pts(3), rng(4);
  const Vector x = random_point(*set, pts);
  CHECK((smoothed_map_estimate(oracle, x, 0.0, 10, rng) - cournot_expected_map(g, x)).norm() == 0.0);

  const double eps = 0.5;
  const long m = 10000;
  const Vector est = smoothed_map_estimate(oracle, x, eps, m, rng);
  const auto [A, q] = CournotMap(g).affine_form();
  const double n = static_cast<double>(g.dimension());
  // est - F(x) = A zbar with E||A zbar||^2 = tr(A A^T) eps^2 / ((n + 2) m).
  const double se = std::sqrt((A * A.transpose()).trace() * eps * eps / ((n + 2) * m));
  CHECK((est - cournot_expected_map(g, x)).norm() <= 3.0 * se);
}

TEST_CASE("smoothing a non-Lipschitz map") {
  // F(y) = sign(y) sqrt|y| on X = [-1, 1]; |F| <= sqrt(1 + eps) on X^eps.
  auto map = std::make_shared<FunctionMap>(1, [](const Vector& y) {
    Vector out(1);
    out[0] = std::copysign(std::sqrt(std::abs(y[0])), y[0]);
    return out;
  });
  const double eps = 0.1;
  const double C = std::sqrt(1.0 + eps);
  const DeterministicOracle oracle(map, C, eps);
  const double L = smoothing_lipschitz_constant(1, C, eps);
  const long m = 10000;
  const double se = C * std::sqrt(2.0 / m);  // difference of two independent means
  Rng rng(12);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    Vector x(1), y(1);
    x[0] = U(rng);
    y[0] = x[0] + 1e-3 * U(rng);
    if (t % 2 == 0) y[0] = U(rng);
    const Vector fx = smoothed_map_estimate(oracle, x, eps, m, rng);
    const Vector fy = smoothed_map_estimate(oracle, y, eps, m, rng);
    const double dx = std::abs(x[0] - y[0]);
    CHECK(std::abs(fx[0] - fy[0]) <= L * dx + 3.0 * se);
    CHECK((fx[0] - fy[0]) * (x[0] - y[0]) >= -3.0 * se * dx);
  }
}

TEST_CASE("smoothed map surrogate") {
  const CournotGame g = CournotGame::standard_5x4();
  auto base = std::make_shared<CournotMap>(g);
  Rng rng(5);
  const SmoothedMap sm(base, 0.3, 50, rng);
  CHECK(sm.is_affine());
  const Vector x = Vector::Constant(g.dimension(), 2.0);
  CHECK((sm.evaluate(x) - base->evaluate(x)).norm() <= 1e-9 * base->evaluate(x).norm());
}
