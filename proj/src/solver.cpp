#include "fdgm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "fdgm/error.hpp"

namespace fdgm {

std::string to_string(DeltaRule rule) {
  switch (rule) {
    case DeltaRule::Spectral:
      return "spectral";
    case DeltaRule::ConservativeLhn:
      return "conservative_Lhn";
    case DeltaRule::LaplacianDegree:
      return "laplacian_degree";
    case DeltaRule::MetropolisTwo:
      return "metropolis_two";
    case DeltaRule::Manual:
      return "manual";
  }
  return "?";
}

DeltaRule delta_rule_from_string(const std::string& name) {
  if (name == "spectral") return DeltaRule::Spectral;
  if (name == "conservative_Lhn") return DeltaRule::ConservativeLhn;
  if (name == "laplacian_degree") return DeltaRule::LaplacianDegree;
  if (name == "metropolis_two") return DeltaRule::MetropolisTwo;
  if (name == "manual") return DeltaRule::Manual;
  throw InvalidInput("unknown delta rule '" + name + "'");
}

StepSizePolicy StepSizePolicy::constant(double delta, double alpha, DeltaRule rule) {
  StepSizePolicy p;
  p.rule = rule;
  p.delta = delta;
  p.alpha_lo = alpha;
  p.alpha_hi = alpha;
  p.schedule = ScheduleKind::Constant;
  return p;
}

void StepSizePolicy::validate() const {
  if (!(alpha_lo > 0.0) || alpha_lo > alpha_hi || !std::isfinite(alpha_hi)) {
    throw InvalidConfig("step interval must satisfy 0 < alpha_lo <= alpha_hi");
  }
  if (schedule == ScheduleKind::Explicit) {
    if (explicit_steps.empty()) throw InvalidConfig("explicit schedule has no steps");
    for (double a : explicit_steps) {
      if (a < alpha_lo || a > alpha_hi) {
        throw InvalidConfig("explicit step " + std::to_string(a) + " outside [alpha_lo, alpha_hi]");
      }
    }
  }
  if (!enforce_step_condition) return;
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidConfig("delta must be positive");
  if (!(alpha_hi < 2.0 / delta)) {
    throw InvalidConfig("step " + std::to_string(alpha_hi) + " violates alpha < 2/delta = " +
                        std::to_string(2.0 / delta));
  }
}

std::vector<double> StepSizePolicy::materialize(int horizon) const {
  std::vector<double> steps(horizon);
  switch (schedule) {
    case ScheduleKind::Constant:
      std::fill(steps.begin(), steps.end(), alpha_hi);
      break;
    case ScheduleKind::UniformRandom: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> dist(alpha_lo, alpha_hi);
      for (auto& a : steps) a = dist(rng);
      break;
    }
    case ScheduleKind::Explicit:
      for (int k = 0; k < horizon; ++k) {
        steps[k] = explicit_steps[static_cast<std::size_t>(k) % explicit_steps.size()];
      }
      break;
  }
  return steps;
}

double StepSizePolicy::descent_constant() const {
  auto f = [this](double a) { return a - a * a * delta / 2.0; };
  return std::min(f(alpha_lo), f(alpha_hi));
}

double compute_delta(DeltaRule rule, const ProblemInstance& instance, const GraphSequence& seq,
                     WeightKind weights, int horizon) {
  const auto lips = instance.lipschitz_constants();
  const double big_l = instance.lipschitz();
  horizon = std::min(horizon, seq.horizon());
  switch (rule) {
    case DeltaRule::Spectral: {
      double sup = 0.0;
      for (int k = 0; k < horizon; ++k) {
        sup = std::max(sup, spectral_radius(build_weights(weights, seq.at(k), lips)));
      }
      return big_l * sup;
    }
    case DeltaRule::ConservativeLhn: {
      double h_upper = 0.0;
      for (int k = 0; k < horizon; ++k) {
        h_upper = std::max(h_upper, build_weights(weights, seq.at(k), lips).h_upper());
      }
      return big_l * h_upper * instance.node_count();
    }
    case DeltaRule::LaplacianDegree: {
      if (weights != WeightKind::Laplacian) {
        throw InvalidConfig("delta rule laplacian_degree requires Laplacian weights");
      }
      double sup_lambda = 0.0;
      double sup_scaled_degree = 0.0;
      for (int k = 0; k < horizon; ++k) {
        const auto& g = seq.at(k);
        sup_lambda = std::max(sup_lambda, spectral_radius(laplacian_matrix(g.node_count(), g.edges())));
        for (int i = 0; i < g.node_count(); ++i) {
          sup_scaled_degree = std::max(sup_scaled_degree, g.degree(i) * lips[i]);
        }
      }
      return std::min(big_l * sup_lambda, 2.0 * sup_scaled_degree);
    }
    case DeltaRule::MetropolisTwo:
      if (weights != WeightKind::Metropolis) {
        throw InvalidConfig("delta rule metropolis_two requires Metropolis weights");
      }
      return 2.0;
    case DeltaRule::Manual:
      throw InvalidConfig("manual delta must be supplied explicitly");
  }
  return 0.0;
}

double delta_condition_margin(double delta, const ProblemInstance& instance,
                              const GraphSequence& seq, WeightKind weights, int max_snapshots) {
  const auto lips = instance.lipschitz_constants();
  const int n = instance.node_count();
  Eigen::VectorXd inv_l(n);
  for (int i = 0; i < n; ++i) inv_l(i) = 1.0 / lips[i];
  const int count = max_snapshots < 0 ? seq.horizon() : std::min(max_snapshots, seq.horizon());
  double margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < count; ++k) {
    Eigen::MatrixXd m = -build_weights(weights, seq.at(k), lips).dense();
    m.diagonal() += delta * inv_l;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    margin = std::min(margin, eig.eigenvalues()(0));
  }
  return margin;
}

SolverState init_state(const ProblemInstance& instance, const InitSpec& init, double tol) {
  const int n = instance.node_count();
  const int d = instance.dim();
  SolverState s;
  s.c = init.c.size() == 0 ? Eigen::VectorXd(Eigen::VectorXd::Zero(d)) : init.c;
  if (s.c.size() != d) throw InvalidInput("resource target has wrong dimension");
  s.w = Eigen::MatrixXd::Zero(n, d);
  if (init.kind == InitKind::RandomSumC) {
    std::mt19937_64 rng(init.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k) s.w(i, k) = gauss(rng);
    Eigen::RowVectorXd mean = s.w.colwise().mean();
    s.w.rowwise() -= mean;
    s.w.rowwise() += s.c.transpose() / n;
  } else if (s.c.squaredNorm() > 0.0) {
    s.w.rowwise() += s.c.transpose() / n;
  }
  s.x.resize(n, d);
  for (int i = 0; i < n; ++i) {
    s.x.row(i) = conjugate_argmax(instance.local(i), s.w.row(i).transpose(), tol).transpose();
  }
  return s;
}

SolverState step(SolverState state, const ProblemInstance& instance, const GraphSnapshot& g,
                 const WeightMatrix& h, double alpha, double tol) {
  const int n = instance.node_count();
  if (state.w.rows() != n || state.x.rows() != n || g.node_count() != n ||
      h.node_count() != n || state.w.cols() != instance.dim()) {
    throw InvalidInput("step: dimension mismatch");
  }
  state.w -= alpha * h.apply(state.x);
  for (int i = 0; i < n; ++i) {
    if (g.neighbors(i).empty()) continue;
    Eigen::VectorXd warm = state.x.row(i).transpose();
    state.x.row(i) =
        conjugate_argmax(instance.local(i), state.w.row(i).transpose(), tol, &warm).transpose();
  }
  ++state.k;
  return state;
}

double dual_value(const ProblemInstance& instance, const Eigen::MatrixXd& w, double tol) {
  double total = 0.0;
  for (int i = 0; i < instance.node_count(); ++i) {
    total += conjugate_value(instance.local(i), w.row(i).transpose(), tol);
  }
  return total;
}

double dual_value_at(const ProblemInstance& instance, const Eigen::MatrixXd& w,
                     const Eigen::MatrixXd& x) {
  double total = 0.0;
  for (int i = 0; i < instance.node_count(); ++i) {
    Eigen::VectorXd xi = x.row(i).transpose();
    total += w.row(i).dot(x.row(i)) - objective_value(instance.local(i), xi);
  }
  return total;
}

double primal_objective(const ProblemInstance& instance, const Eigen::MatrixXd& x) {
  double total = 0.0;
  for (int i = 0; i < instance.node_count(); ++i) {
    total += objective_value(instance.local(i), x.row(i).transpose());
  }
  return total;
}

Eigen::MatrixXd consensus_projection(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = x;
  out.rowwise() -= x.colwise().mean();
  return out;
}

double feasibility_gap(const Eigen::MatrixXd& x) { return consensus_projection(x).norm(); }

double edge_disagreement(const GraphSnapshot& g, const Eigen::MatrixXd& x) {
  double worst = 0.0;
  for (const auto& [i, j] : g.edges()) worst = std::max(worst, (x.row(i) - x.row(j)).norm());
  return worst;
}

void fill_primal_metrics(MetricsRecord& rec, const ProblemInstance& instance,
                         const Eigen::MatrixXd& x, const ReferenceSolution* reference,
                         const Eigen::VectorXd& c) {
  const int n = instance.node_count();
  Eigen::RowVectorXd target = reference ? Eigen::RowVectorXd(reference->x_star.transpose())
                                        : Eigen::RowVectorXd(x.colwise().mean());
  double sum_norm = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = (x.row(i) - target).norm();
    sum_norm += e;
    sum_sq += e * e;
  }
  rec.primal_error = sum_norm / n;
  rec.stacked_error = std::sqrt(sum_sq);
  rec.feasibility_gap = feasibility_gap(x);
  double objective = primal_objective(instance, x);
  if (c.size() != 0) objective -= c.dot(x.colwise().mean().transpose());
  rec.objective_gap = reference ? objective - reference->F_star : objective;
}

RunResult run(const ProblemInstance& instance, const GraphSequence& seq, WeightKind weights,
              const StepSizePolicy& policy, const InitSpec& init, const RunOptions& options,
              const ReferenceSolution* reference) {
  policy.validate();
  if (options.horizon > seq.horizon()) {
    throw InvalidInput("run horizon " + std::to_string(options.horizon) +
                       " exceeds graph sequence length " + std::to_string(seq.horizon()));
  }
  if (seq.node_count() != instance.node_count()) {
    throw InvalidInput("graph and instance node counts differ");
  }
  if (options.record_every < 1) throw InvalidInput("record_every must be >= 1");

  const auto lips = instance.lipschitz_constants();
  const auto steps = policy.materialize(options.horizon);
  const double rho = policy.descent_constant();
  const int window = seq.window();
  const Eigen::MatrixXd* w_star =
      reference && reference->w_star_estimate ? &*reference->w_star_estimate : nullptr;

  RunResult result;
  SolverState state = init_state(instance, init, options.oracle_tol);
  double dual = dual_value_at(instance, state.w, state.x);
  double best_dual = dual;
  double best_objective = std::numeric_limits<double>::infinity();

  auto record = [&](const SolverState& s, double d_value) {
    MetricsRecord rec;
    rec.k = s.k;
    rec.dual_value = d_value;
    fill_primal_metrics(rec, instance, s.x, reference, s.c);
    if (reference) {
      rec.dual_gap = d_value - reference->D_star;
    } else {
      rec.dual_gap = d_value - best_dual;
      best_objective = std::min(best_objective, rec.objective_gap);
      rec.objective_gap -= best_objective;
    }
    rec.dual_norm = s.w.norm();
    result.records.push_back(rec);
  };
  auto track = [&](const SolverState& s, double d_value) {
    auto& inv = result.invariants;
    const double max_block = s.w.rowwise().norm().maxCoeff();
    const double sum_err = (s.w.colwise().sum().transpose() - s.c).norm();
    inv.worst_sum_ratio = std::max(inv.worst_sum_ratio, sum_err / (1.0 + max_block));
    inv.min_dual_value = std::min(inv.min_dual_value, d_value);
    if (w_star) {
      result.max_distance_to_w_star =
          std::max(result.max_distance_to_w_star, (s.w - *w_star).norm());
    }
    if (options.keep_window_starts && s.k % window == 0) result.window_starts.push_back(s.w);
  };

  track(state, dual);
  record(state, dual);
  for (int k = 0; k < options.horizon; ++k) {
    const auto& g = seq.at(k);
    const WeightMatrix h = build_weights(weights, g, lips);
    const double curvature = h.quadratic_form(state.x);
    state = step(std::move(state), instance, g, h, steps[k], options.oracle_tol);
    const double next_dual = dual_value_at(instance, state.w, state.x);
    auto& inv = result.invariants;
    inv.worst_dual_increase = std::max(inv.worst_dual_increase, next_dual - dual);
    inv.worst_descent_excess = std::max(inv.worst_descent_excess, next_dual - dual + rho * curvature);
    inv.steps = state.k;
    dual = next_dual;
    best_dual = std::min(best_dual, dual);
    track(state, dual);
    if (state.k % options.record_every == 0 || state.k == options.horizon) record(state, dual);
  }
  if (options.horizon > 0) {
    result.invariants.final_edge_disagreement =
        edge_disagreement(seq.at(options.horizon - 1), state.x);
  }
  result.final_state = std::move(state);
  return result;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << "k,D,dual_gap,primal_err,feas_gap,F_gap\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.k << ',' << r.dual_value << ',' << r.dual_gap << ',' << r.primal_error << ','
        << r.feasibility_gap << ',' << r.objective_gap << '\n';
  }
}

}  // namespace fdgm
