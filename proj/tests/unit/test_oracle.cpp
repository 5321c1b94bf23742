#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fdgm/error.hpp"
#include "fdgm/oracle.hpp"

using namespace fdgm;

namespace {

LocalProblem scalar(double a, double b, double gamma, double lo, double hi) {
  return LocalProblem(Eigen::MatrixXd::Constant(1, 1, a), Eigen::VectorXd::Constant(1, b), gamma,
                      Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi));
}

// Termwise evaluation of w^T x - f(x), written without Eigen products.
double concave_objective(const LocalProblem& lp, const Eigen::VectorXd& w, const double* x) {
  const int d = lp.dim();
  double v = 0.0;
  for (int i = 0; i < d; ++i) {
    v += (w(i) - lp.linear()(i)) * x[i] - lp.l1_weight() * std::abs(x[i]);
    for (int j = 0; j < d; ++j) v -= x[i] * lp.quad()(i, j) * x[j];
  }
  return v;
}

struct GridMax {
  Eigen::VectorXd x;
  double value;
};

// Exhaustive search on a uniform grid over the box (d <= 2), followed by a
// second exhaustive pass on a fine grid around the winner.
GridMax grid_argmax(const LocalProblem& lp, const Eigen::VectorXd& w, int points) {
  const int d = lp.dim();
  Eigen::VectorXd lo = lp.lower(), hi = lp.upper();
  GridMax best{Eigen::VectorXd::Zero(d), -INFINITY};
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXd step = (hi - lo) / (points - 1);
    const int n1 = d == 2 ? points : 1;
    double x[2] = {0, 0};
    for (int a = 0; a < points; ++a) {
      x[0] = lo(0) + a * step(0);
      for (int b = 0; b < n1; ++b) {
        if (d == 2) x[1] = lo(1) + b * step(1);
        const double v = concave_objective(lp, w, x);
        if (v > best.value) {
          best.value = v;
          for (int i = 0; i < d; ++i) best.x(i) = x[i];
        }
      }
    }
    lo = (best.x - 2 * step).cwiseMax(lp.lower());
    hi = (best.x + 2 * step).cwiseMin(lp.upper());
  }
  return best;
}

LocalProblem random_problem(std::mt19937_64& rng, int d, double gamma) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = u(rng);
  Eigen::MatrixXd a = m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b(d), lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    b(i) = 2 * u(rng);
    lo(i) = -0.5 - std::abs(u(rng));
    hi(i) = 0.5 + std::abs(u(rng));
  }
  return LocalProblem(a, b, gamma, lo, hi);
}

}  // namespace

TEST_CASE("local problem validation") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2), one = Eigen::VectorXd::Ones(2);
  CHECK_NOTHROW(LocalProblem(a, z, 0.0, -one, one));
  Eigen::MatrixXd asym = a;
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(LocalProblem(asym, z, 0.0, -one, one), InvalidInput);
  CHECK_THROWS_AS(LocalProblem(-a, z, 0.0, -one, one), InvalidInput);
  CHECK_THROWS_AS(LocalProblem(a, z, -1.0, -one, one), InvalidInput);
  CHECK_THROWS_AS(LocalProblem(a, z, 0.0, z, one), InvalidInput);
  LocalProblem lp(2 * a, z, 0.0, -one, one);
  CHECK(lp.convexity() == doctest::Approx(2.0));
  CHECK(lp.lipschitz() == doctest::Approx(0.5));
}

TEST_CASE("conjugate argmax on scalar problems") {
  auto lp = scalar(1, 0, 0, -1, 1);
  CHECK(conjugate_argmax(lp, Eigen::VectorXd::Constant(1, 0.0))(0) == doctest::Approx(0.0));
  CHECK(conjugate_argmax(lp, Eigen::VectorXd::Constant(1, 4.0))(0) == doctest::Approx(1.0));
  CHECK(conjugate_value(lp, Eigen::VectorXd::Constant(1, 0.0)) == doctest::Approx(0.0));
  CHECK(conjugate_value(lp, Eigen::VectorXd::Constant(1, 4.0)) == doctest::Approx(3.0));

  auto l1 = scalar(1, 0, 0.5, -1, 1);
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(1, 1.0);
  CHECK(conjugate_argmax(l1, w)(0) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(std::abs(grid_argmax(l1, w, 200001).x(0) - 0.25) < 1e-5);
}

TEST_CASE("objective value") {
  std::mt19937_64 rng(1);
  auto lp = random_problem(rng, 2, 0.3);
  CHECK(objective_value(lp, Eigen::VectorXd::Zero(2)) == 0.0);
  CHECK(objective_value(scalar(2, 1, 0, -2, 2), Eigen::VectorXd::Constant(1, 1.0)) ==
        doctest::Approx(3.0));
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd x = Eigen::VectorXd::Random(2);
    const double termwise = -concave_objective(lp, Eigen::VectorXd::Zero(2), x.data());
    CHECK(objective_value(lp, x) == doctest::Approx(termwise).epsilon(1e-12));
  }
}

TEST_CASE("conjugate matches exhaustive grid search in two dimensions") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int t = 0; t < 5; ++t) {
    auto lp = random_problem(rng, 2, t % 2 ? 0.4 : 0.0);
    Eigen::VectorXd w(2);
    w << u(rng), u(rng);
    const auto grid = grid_argmax(lp, w, 1000);
    const Eigen::VectorXd x = conjugate_argmax(lp, w);
    CHECK((x - grid.x).lpNorm<Eigen::Infinity>() < 1e-4);
    CHECK(std::abs(conjugate_value(lp, w) - grid.value) < 1e-5);
    CHECK(conjugate_value(lp, w) >= grid.value - 1e-9);
  }
}

TEST_CASE("conjugate gradient equals argmax (finite differences)") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 20; ++t) {
    auto lp = random_problem(rng, 3, 0.2);
    Eigen::VectorXd w(3);
    for (int i = 0; i < 3; ++i) w(i) = u(rng);
    const Eigen::VectorXd x = conjugate_argmax(lp, w, 1e-13);
    const double h = 1e-5;
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
      e(i) = h;
      const double fd = (conjugate_value(lp, w + e, 1e-13) - conjugate_value(lp, w - e, 1e-13)) / (2 * h);
      CHECK(std::abs(fd - x(i)) < 1e-4);
    }
  }
}

TEST_CASE("argmax is Lipschitz with constant 1/theta") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  auto lp = random_problem(rng, 4, 0.1);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a(i) = u(rng);
      b(i) = u(rng);
    }
    const double lhs = (conjugate_argmax(lp, a) - conjugate_argmax(lp, b)).norm();
    CHECK(lhs <= lp.lipschitz() * (a - b).norm() * (1 + 1e-6) + 2 * kDefaultOracleTolerance);
  }
}

TEST_CASE("unbounded box uses the closed form") {
  const double inf = INFINITY;
  auto lp = scalar(2, 1, 0, -inf, inf);
  CHECK(lp.box_is_unbounded());
  CHECK(conjugate_argmax(lp, Eigen::VectorXd::Constant(1, 5.0))(0) == doctest::Approx(1.0));
}

TEST_CASE("iteration cap raises OracleFailure") {
  Eigen::MatrixXd q(2, 2);
  q << 1.0, 0.0, 0.0, 1e6;
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(2, -1.0);
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -1.0), hi = -lo;
  CHECK_THROWS_AS(solve_box_l1_qp(q, c, 0.0, lo, hi, 1.0, 1e6, 1e-14, nullptr, 3), OracleFailure);
}

TEST_CASE("prox of l1 plus box") {
  Eigen::VectorXd v(3), lo(3), hi(3);
  v << 2.0, -0.1, -3.0;
  lo << -1, -1, -1;
  hi << 1, 1, 1;
  const Eigen::VectorXd p = prox_l1_box(v, 0.5, lo, hi);
  CHECK(p(0) == doctest::Approx(1.0));
  CHECK(p(1) == 0.0);
  CHECK(p(2) == doctest::Approx(-1.0));
}

TEST_CASE("generated instances") {
  InstanceSpec spec;
  spec.seed = 4;
  auto inst = generate_instance(spec);
  CHECK(inst.node_count() == 50);
  CHECK(inst.dim() == 5);
  for (const auto& lp : inst.locals()) {
    CHECK((lp.quad() - lp.quad().transpose()).norm() == 0.0);
    CHECK(lp.convexity() >= 2.0 - 1e-9);
    CHECK(lp.convexity() <= 3.0 + 1e-9);
    CHECK(lp.l1_weight() == doctest::Approx(1.0 / 50));
    CHECK((lp.lower().array() < 0).all());
    CHECK((lp.upper().array() > 0).all());
  }
  spec.theta_lo = 0.2;
  spec.theta_hi = 0.4;
  auto low = generate_instance(spec);
  CHECK(low.theta_min() >= 0.2 - 1e-9);
  CHECK(low.lipschitz() <= 5.0 + 1e-6);

  spec.theta_lo = 3.0;
  CHECK_THROWS_AS(generate_instance(spec), InvalidInput);

  InstanceSpec same;
  same.seed = 4;
  CHECK(generate_instance(same).local(7).quad() == inst.local(7).quad());
}

TEST_CASE("instance JSON round trip, including infinite boxes") {
  InstanceSpec spec;
  spec.node_count = 4;
  spec.dim = 2;
  spec.seed = 2;
  for (bool unconstrained : {false, true}) {
    spec.unconstrained = unconstrained;
    auto inst = generate_instance(spec);
    std::stringstream io;
    write_instance(io, inst);
    auto back = read_instance(io);
    REQUIRE(back.node_count() == 4);
    for (int i = 0; i < 4; ++i) {
      CHECK(back.local(i).quad() == inst.local(i).quad());
      CHECK(back.local(i).linear() == inst.local(i).linear());
      CHECK(back.local(i).lower() == inst.local(i).lower());
      CHECK(back.local(i).upper() == inst.local(i).upper());
    }
    CHECK(back.unconstrained() == unconstrained);
  }
  std::istringstream bad("{\"format\": \"something-else\"}");
  CHECK_THROWS_AS(read_instance(bad), InvalidInput);
}
