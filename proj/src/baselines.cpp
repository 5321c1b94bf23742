#include "fdgm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fdgm/error.hpp"

namespace fdgm {

namespace {

double mixing_weight(const GraphSnapshot& g, int i, int j) {
  return 1.0 / (1.0 + std::max(g.degree(i), g.degree(j)));
}

// W x without forming W: (W x)_i = x_i + sum_j w_ij (x_j - x_i).
Eigen::MatrixXd mix(const GraphSnapshot& g, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = x;
  for (const auto& [i, j] : g.edges()) {
    Eigen::RowVectorXd flow = mixing_weight(g, i, j) * (x.row(j) - x.row(i));
    out.row(i) += flow;
    out.row(j) -= flow;
  }
  return out;
}

Eigen::MatrixXd smooth_gradients(const ProblemInstance& instance, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd grad(x.rows(), x.cols());
  for (int i = 0; i < instance.node_count(); ++i) {
    const auto& lp = instance.local(i);
    grad.row(i) = (2.0 * (lp.quad() * x.row(i).transpose()) + lp.linear()).transpose();
  }
  return grad;
}

}  // namespace

Eigen::MatrixXd mixing_matrix(const GraphSnapshot& g) {
  const int n = g.node_count();
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n, n);
  for (const auto& [i, j] : g.edges()) {
    const double m = mixing_weight(g, i, j);
    w(i, j) = m;
    w(j, i) = m;
    w(i, i) -= m;
    w(j, j) -= m;
  }
  return w;
}

BaselineState init_baseline(const ProblemInstance& instance, BaselineKind kind, double tol) {
  const int n = instance.node_count();
  const int d = instance.dim();
  BaselineState s;
  s.x.resize(n, d);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < n; ++i) {
    s.x.row(i) = conjugate_argmax(instance.local(i), zero, tol).transpose();
  }
  if (kind == BaselineKind::Diging) s.y = smooth_gradients(instance, s.x);
  return s;
}

Eigen::VectorXd local_subgradient(const LocalProblem& lp, const Eigen::VectorXd& x) {
  Eigen::VectorXd g = 2.0 * (lp.quad() * x) + lp.linear();
  if (lp.l1_weight() > 0.0) {
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      g(k) += lp.l1_weight() * (x(k) > 0.0 ? 1.0 : (x(k) < 0.0 ? -1.0 : 0.0));
    }
  }
  return g;
}

BaselineState subgrad_step(BaselineState state, const ProblemInstance& instance,
                           const GraphSnapshot& g, double alpha) {
  const int n = instance.node_count();
  Eigen::MatrixXd next(state.x.rows(), state.x.cols());
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd v = state.x.row(i);
    for (int j : g.neighbors(i)) v += state.x.row(j);
    v /= static_cast<double>(g.neighbors(i).size() + 1);
    const auto& lp = instance.local(i);
    Eigen::VectorXd vi = v.transpose();
    Eigen::VectorXd moved = vi - alpha * local_subgradient(lp, vi);
    next.row(i) = moved.cwiseMax(lp.lower()).cwiseMin(lp.upper()).transpose();
  }
  state.x = std::move(next);
  ++state.k;
  return state;
}

BaselineState diging_step(BaselineState state, const ProblemInstance& instance,
                          const GraphSnapshot& g, double alpha) {
  if (!instance.unconstrained()) {
    throw InvalidConfig("DIGing requires an unconstrained smooth instance (no boxes, gamma = 0)");
  }
  const Eigen::MatrixXd grad_old = smooth_gradients(instance, state.x);
  Eigen::MatrixXd x_next = mix(g, state.x) - alpha * state.y;
  state.y = mix(g, state.y) + smooth_gradients(instance, x_next) - grad_old;
  state.x = std::move(x_next);
  ++state.k;
  return state;
}

BaselineRunResult run_baseline(const ProblemInstance& instance, const GraphSequence& seq,
                               const BaselineConfig& config, const RunOptions& options,
                               const ReferenceSolution* reference) {
  if (options.horizon > seq.horizon()) throw InvalidInput("run horizon exceeds graph sequence");
  if (!(config.step > 0.0)) throw InvalidConfig("baseline step must be positive");
  if (config.kind == BaselineKind::Diging && !instance.unconstrained()) {
    throw InvalidConfig("DIGing requires an unconstrained smooth instance (no boxes, gamma = 0)");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  BaselineRunResult result;
  BaselineState state = init_baseline(instance, config.kind, options.oracle_tol);
  double best_objective = std::numeric_limits<double>::infinity();

  auto record = [&] {
    MetricsRecord rec;
    rec.k = state.k;
    rec.dual_value = nan;
    rec.dual_gap = nan;
    fill_primal_metrics(rec, instance, state.x, reference, Eigen::VectorXd());
    if (!reference) {
      best_objective = std::min(best_objective, rec.objective_gap);
      rec.objective_gap -= best_objective;
    }
    result.records.push_back(rec);
  };

  record();
  for (int k = 0; k < options.horizon; ++k) {
    const auto& g = seq.at(k);
    if (config.kind == BaselineKind::SubgradProjection) {
      const double alpha = config.diminishing ? config.step / (k + 1) : config.step;
      state = subgrad_step(std::move(state), instance, g, alpha);
    } else {
      state = diging_step(std::move(state), instance, g, config.step);
      const Eigen::VectorXd drift = state.y.colwise().sum().transpose() -
                                    smooth_gradients(instance, state.x).colwise().sum().transpose();
      result.invariants.worst_tracking_error =
          std::max(result.invariants.worst_tracking_error, drift.norm());
    }
    if (state.k % options.record_every == 0 || state.k == options.horizon) record();
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace fdgm
