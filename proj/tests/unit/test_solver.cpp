#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fdgm/certify.hpp"
#include "fdgm/error.hpp"
#include "fdgm/solver.hpp"

using namespace fdgm;

namespace {

LocalProblem scalar(double a, double b, double lo = -10, double hi = 10) {
  return LocalProblem(Eigen::MatrixXd::Constant(1, 1, a), Eigen::VectorXd::Constant(1, b), 0.0,
                      Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi));
}

// f_1 = x^2 - 2x, f_2 = x^2 on [-10, 10]; optimum x* = 0.5.
ProblemInstance two_node() { return ProblemInstance({scalar(1, -2), scalar(1, 0)}); }

ProblemInstance identity_instance(int n) {
  std::vector<LocalProblem> locals;
  for (int i = 0; i < n; ++i) locals.push_back(scalar(1, 0.1 * i, -1, 1));
  return ProblemInstance(locals);
}

InstanceSpec small_spec(int n, std::uint64_t seed) {
  InstanceSpec s;
  s.node_count = n;
  s.dim = 3;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("delta rules") {
  auto inst = identity_instance(50);
  auto ring = generate_sequence(SequenceKind::FullStatic, 50, 1, 5, 0);
  CHECK(compute_delta(DeltaRule::MetropolisTwo, inst, ring, WeightKind::Metropolis, 5) == 2.0);
  CHECK(compute_delta(DeltaRule::ConservativeLhn, inst, ring, WeightKind::Laplacian, 5) ==
        doctest::Approx(50.0));
  CHECK_THROWS_AS(compute_delta(DeltaRule::MetropolisTwo, inst, ring, WeightKind::Laplacian, 5),
                  InvalidConfig);
  CHECK_THROWS_AS(compute_delta(DeltaRule::LaplacianDegree, inst, ring, WeightKind::Metropolis, 5),
                  InvalidConfig);

  // One edge per step: delta = 2L, so any alpha < 1/L is admissible.
  auto gi = generate_instance(small_spec(6, 1));
  auto gossip = generate_sequence(SequenceKind::Gossip, 6, 5, 50, 2);
  CHECK(compute_delta(DeltaRule::LaplacianDegree, gi, gossip, WeightKind::Laplacian, 50) ==
        doctest::Approx(2.0 * gi.lipschitz()));

  // Spectral delta is the tightest: the margin at delta is ~0.
  auto wt = generate_sequence(SequenceKind::WindowedTree, 6, 3, 30, 4);
  for (auto kind : {WeightKind::Laplacian, WeightKind::Metropolis}) {
    const double d = compute_delta(DeltaRule::Spectral, gi, wt, kind, 30);
    CHECK(d > 0);
  }
  CHECK(delta_condition_margin(2.0, gi, wt, WeightKind::Metropolis, -1) >= -1e-10);
  const double lhn = compute_delta(DeltaRule::ConservativeLhn, gi, wt, WeightKind::Laplacian, 30);
  CHECK(delta_condition_margin(lhn, gi, wt, WeightKind::Laplacian, -1) >= -1e-10);
}

TEST_CASE("step size policy") {
  auto p = StepSizePolicy::constant(2.0, 0.5, DeltaRule::MetropolisTwo);
  CHECK_NOTHROW(p.validate());
  CHECK(p.descent_constant() == doctest::Approx(0.25));
  CHECK(p.materialize(3) == std::vector<double>{0.5, 0.5, 0.5});

  auto big = StepSizePolicy::constant(2.0, 1.5);  // 3/delta
  CHECK_THROWS_AS(big.validate(), InvalidConfig);
  big.enforce_step_condition = false;
  CHECK_NOTHROW(big.validate());

  StepSizePolicy r = p;
  r.schedule = ScheduleKind::UniformRandom;
  r.alpha_lo = 0.05;
  r.seed = 9;
  const auto a = r.materialize(500);
  CHECK(a == r.materialize(500));
  for (double x : a) CHECK((x >= 0.05 && x <= 0.5));

  StepSizePolicy e = p;
  e.schedule = ScheduleKind::Explicit;
  e.alpha_lo = 0.1;
  e.explicit_steps = {0.1, 0.6};
  CHECK_THROWS_AS(e.validate(), InvalidConfig);
}

TEST_CASE("initialization") {
  auto inst = generate_instance(small_spec(5, 3));
  auto z = init_state(inst, {});
  CHECK(z.w.colwise().sum().norm() == 0.0);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd x0 = conjugate_argmax(inst.local(i), Eigen::VectorXd::Zero(3));
    CHECK((z.x.row(i).transpose() - x0).norm() < 1e-9);
  }
  InitSpec r{InitKind::RandomSumC, 17, {}};
  CHECK(init_state(inst, r).w.colwise().sum().norm() <= 1e-12);
  r.c = Eigen::Vector3d(1, 0, 0);
  const auto s = init_state(inst, r);
  CHECK((s.w.colwise().sum().transpose() - r.c).norm() <= 1e-12);
}

TEST_CASE("single step") {
  auto inst = ProblemInstance({scalar(1, 0), scalar(1, 0)});
  GraphSnapshot g(2, {{0, 1}});
  SolverState s;
  s.w = Eigen::MatrixXd::Zero(2, 1);
  s.x = (Eigen::MatrixXd(2, 1) << 0.0, 2.0).finished();
  auto next = step(s, inst, g, laplacian_weights(g), 0.25);
  CHECK(next.w(0, 0) == doctest::Approx(0.5));
  CHECK(next.w(1, 0) == doctest::Approx(-0.5));
  CHECK(next.k == 1);

  SolverState c;
  c.w = Eigen::MatrixXd::Zero(2, 1);
  c.x = Eigen::MatrixXd::Constant(2, 1, 0.3);
  auto fixed = step(c, inst, g, laplacian_weights(g), 0.25);
  CHECK(fixed.w == c.w);

  // Isolated node keeps its blocks.
  auto three = ProblemInstance({scalar(1, 0), scalar(1, 1), scalar(1, -1)});
  GraphSnapshot g3(3, {{0, 1}});
  SolverState t = init_state(three, {});
  auto t1 = step(t, three, g3, laplacian_weights(g3), 0.25);
  CHECK(t1.w.row(2) == t.w.row(2));
  CHECK(t1.x.row(2) == t.x.row(2));
}

TEST_CASE("feasibility gap and projection") {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 2.0;
  CHECK(feasibility_gap(x) == doctest::Approx(std::sqrt(2.0)));
  CHECK(feasibility_gap(Eigen::MatrixXd::Constant(4, 2, 1.5)) == 0.0);
  CHECK(consensus_projection(x).isApprox((Eigen::MatrixXd(2, 1) << -1.0, 1.0).finished()));
}

TEST_CASE("two-node analytic problem converges") {
  auto inst = two_node();
  auto seq = generate_sequence(SequenceKind::FullStatic, 2, 1, 400, 0);
  auto ref = solve_centralized(inst);
  CHECK(ref.x_star(0) == doctest::Approx(0.5));
  RunOptions opt;
  opt.horizon = 400;
  auto res = run(inst, seq, WeightKind::Metropolis, StepSizePolicy::constant(2.0, 0.5), {}, opt, &ref);
  CHECK(res.final_state.x(0, 0) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(res.final_state.x(1, 0) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(res.invariants.worst_dual_increase <= 1e-8);
  CHECK(res.invariants.worst_descent_excess <= 1e-8);
  CHECK(res.invariants.worst_sum_ratio <= 1e-12);
  CHECK(res.invariants.min_dual_value >= ref.D_star - 1e-9);
}

TEST_CASE("dual values") {
  auto inst = generate_instance(small_spec(4, 6));
  Eigen::MatrixXd w = Eigen::MatrixXd::Random(4, 3);
  Eigen::MatrixXd x(4, 3);
  double direct = 0.0;
  for (int i = 0; i < 4; ++i) {
    x.row(i) = conjugate_argmax(inst.local(i), w.row(i).transpose()).transpose();
    direct += conjugate_value(inst.local(i), w.row(i).transpose());
  }
  CHECK(dual_value(inst, w) == doctest::Approx(direct));
  CHECK(dual_value_at(inst, w, x) == doctest::Approx(direct));
}

TEST_CASE("runs are deterministic and CSV has the fixed schema") {
  auto inst = generate_instance(small_spec(8, 2));
  auto seq = generate_sequence(SequenceKind::WindowedTree, 8, 4, 200, 5);
  RunOptions opt;
  opt.horizon = 200;
  opt.record_every = 7;
  auto policy = StepSizePolicy::constant(2.0, 0.5);
  std::ostringstream a, b;
  write_metrics_csv(a, run(inst, seq, WeightKind::Metropolis, policy, {}, opt).records);
  write_metrics_csv(b, run(inst, seq, WeightKind::Metropolis, policy, {}, opt).records);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("k,D,dual_gap,primal_err,feas_gap,F_gap\n", 0) == 0);
  auto recs = run(inst, seq, WeightKind::Metropolis, policy, {}, opt).records;
  CHECK(recs.front().k == 0);
  CHECK(recs[1].k == 7);
  CHECK(recs.back().k == 200);
}

TEST_CASE("edge disagreement") {
  GraphSnapshot g(3, {{0, 1}, {1, 2}});
  Eigen::MatrixXd x(3, 1);
  x << 0.0, 1.0, 4.0;
  CHECK(edge_disagreement(g, x) == doctest::Approx(3.0));
}
