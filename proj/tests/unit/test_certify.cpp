#include <doctest.h>

#include <cmath>
#include <random>

#include "fdgm/certify.hpp"
#include "fdgm/error.hpp"

using namespace fdgm;

namespace {

LocalProblem scalar(double a, double b, double gamma, double lo, double hi) {
  return LocalProblem(Eigen::MatrixXd::Constant(1, 1, a), Eigen::VectorXd::Constant(1, b), gamma,
                      Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi));
}

// Cyclic coordinate descent on sum_i f_i over the intersected box; each
// coordinate subproblem a x^2 + c x + g|x| on [lo, hi] is solved exactly.
Eigen::VectorXd coordinate_descent(const ProblemInstance& inst, int sweeps) {
  const int d = inst.dim();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(d, -INFINITY), hi = -lo;
  double g = 0.0;
  for (const auto& lp : inst.locals()) {
    a += lp.quad();
    b += lp.linear();
    g += lp.l1_weight();
    lo = lo.cwiseMax(lp.lower());
    hi = hi.cwiseMin(lp.upper());
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  for (int s = 0; s < sweeps; ++s) {
    for (int j = 0; j < d; ++j) {
      const double q = a(j, j);
      const double c = b(j) + 2 * (a.row(j).dot(x) - q * x(j));
      double best = 0.0;
      double best_val = INFINITY;
      for (double cand : {(-c - g) / (2 * q), (-c + g) / (2 * q), 0.0, lo(j), hi(j)}) {
        cand = std::clamp(cand, lo(j), hi(j));
        const double v = q * cand * cand + c * cand + g * std::abs(cand);
        if (v < best_val) {
          best_val = v;
          best = cand;
        }
      }
      x(j) = best;
    }
  }
  return x;
}

}  // namespace

TEST_CASE("centralized reference on analytic problems") {
  auto inst = ProblemInstance({scalar(1, -2, 0, -10, 10), scalar(1, 0, 0, -10, 10)});
  auto ref = solve_centralized(inst);
  CHECK(ref.x_star(0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(ref.F_star == doctest::Approx(-0.5));
  CHECK(ref.D_star == doctest::Approx(0.5));

  auto l1 = ProblemInstance({scalar(1, 0, 1, -1, 1), scalar(1, 0, 1, -1, 1)});
  CHECK(std::abs(solve_centralized(l1).x_star(0)) < 1e-12);
}

TEST_CASE("centralized reference agrees with coordinate descent") {
  InstanceSpec spec;
  spec.node_count = 10;
  spec.dim = 3;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    spec.seed = seed;
    auto inst = generate_instance(spec);
    const Eigen::VectorXd x = solve_centralized(inst).x_star;
    CHECK((x - coordinate_descent(inst, 5000)).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("inscribed radius and dual norm bound") {
  auto inst = ProblemInstance({scalar(1, 0, 0, -1, 2), scalar(1, 0, 0, -1, 2)});
  CHECK(inscribed_radius(inst) == 1.0);
  auto ref = solve_centralized(inst);
  CHECK(ref.F_star == doctest::Approx(0.0));
  CHECK(dual_norm_bound(inst, ref) == doctest::Approx(2.0));
}

TEST_CASE("theory constants and rate checks on a small scenario") {
  InstanceSpec spec;
  spec.node_count = 8;
  spec.dim = 3;
  spec.seed = 12;
  auto inst = generate_instance(spec);
  const int horizon = 200;
  auto seq = generate_sequence(SequenceKind::WindowedTree, 8, 4, 10 * horizon, 3);
  auto policy = StepSizePolicy::constant(2.0, 0.5, DeltaRule::MetropolisTwo);
  auto ref = solve_centralized(inst);
  estimate_dual_optimum(ref, inst, seq, WeightKind::Metropolis, policy, {}, 10 * horizon);
  RunOptions opt;
  opt.horizon = horizon;
  opt.record_every = 4;
  opt.keep_window_starts = true;
  auto res = run(inst, seq, WeightKind::Metropolis, policy, {}, opt, &ref);
  auto c = theory_constants(policy, seq, inst, WeightKind::Metropolis, res, ref, horizon);
  CHECK(c.rho == doctest::Approx(0.25));
  CHECK(c.eta > 0.0);
  CHECK(c.lambda_lower > 0.0);
  CHECK(c.m_tilde.size() == static_cast<std::size_t>(horizon / 4 + 1));
  const double gap0 = res.records.front().dual_gap;
  CHECK(dual_rate_bound(c, gap0, 0) == doctest::Approx(gap0));
  CHECK(dual_rate_bound(c, gap0, 3) == doctest::Approx(gap0));
  CHECK(dual_rate_bound(c, gap0, 40) < gap0);
  auto report = check_rate_bounds(res, c, ref);
  CHECK(report.passed());
  CHECK(report.families.size() == 8);

  auto unchecked = policy;
  unchecked.enforce_step_condition = false;
  CHECK_THROWS_AS(theory_constants(unchecked, seq, inst, WeightKind::Metropolis, res, ref, horizon),
                  CertificationUnavailable);
}

TEST_CASE("disconnected window makes certification unavailable") {
  InstanceSpec spec;
  spec.node_count = 3;
  spec.dim = 1;
  auto inst = generate_instance(spec);
  std::vector<GraphSnapshot> snaps(8, GraphSnapshot(3, {{0, 1}}));
  GraphSequence seq(3, 2, snaps);
  auto policy = StepSizePolicy::constant(2.0, 0.5);
  auto ref = solve_centralized(inst);
  ref.w_star_estimate = Eigen::MatrixXd::Zero(3, 1);
  RunOptions opt;
  opt.horizon = 8;
  opt.keep_window_starts = true;
  auto res = run(inst, seq, WeightKind::Metropolis, policy, {}, opt, &ref);
  CHECK_THROWS_AS(theory_constants(policy, seq, inst, WeightKind::Metropolis, res, ref, 8),
                  CertificationUnavailable);
}
