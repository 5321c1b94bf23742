#pragma once

// Comparison methods sharing the graph sequence and metrics pipeline:
// consensus-based subgradient projection and DIGing (gradient tracking).

#include <Eigen/Dense>

#include "fdgm/graph.hpp"
#include "fdgm/oracle.hpp"
#include "fdgm/reference.hpp"
#include "fdgm/solver.hpp"

namespace fdgm {

enum class BaselineKind { SubgradProjection, Diging };

struct BaselineConfig {
  BaselineKind kind = BaselineKind::SubgradProjection;
  double step = 1.0;        // a in a/k (diminishing) or the constant step
  bool diminishing = true;  // subgradient default a/k; DIGing always constant
};

// Metropolis-Hastings mixing matrix: 1/(1 + max(|N_i|, |N_j|)) on edges,
// diagonal takes the remainder. Symmetric and doubly stochastic.
Eigen::MatrixXd mixing_matrix(const GraphSnapshot& g);

struct BaselineState {
  int k = 0;
  Eigen::MatrixXd x;  // n-by-d
  Eigen::MatrixXd y;  // DIGing tracker, empty for the subgradient method
};

// Initial primal iterate shared with the dual method: x_i^0 = argmin of f_i
// over X_i (the oracle at w = 0).
BaselineState init_baseline(const ProblemInstance& instance, BaselineKind kind,
                            double tol = kDefaultOracleTolerance);

// One l1 subgradient of f_i at x (sign convention: 0 at 0).
Eigen::VectorXd local_subgradient(const LocalProblem& lp, const Eigen::VectorXd& x);

// v_i = mean of x_j over N_i u {i}; x_i <- clip(v_i - alpha g_i(v_i)).
BaselineState subgrad_step(BaselineState state, const ProblemInstance& instance,
                           const GraphSnapshot& g, double alpha);

// x <- W x - alpha y;  y <- W y + grad(x_new) - grad(x_old).
// Throws InvalidConfig unless the instance is unconstrained and smooth.
BaselineState diging_step(BaselineState state, const ProblemInstance& instance,
                          const GraphSnapshot& g, double alpha);

struct BaselineInvariants {
  // max over steps of ||1^T y - 1^T grad f(x)|| (DIGing only)
  double worst_tracking_error = 0.0;
};

struct BaselineRunResult {
  std::vector<MetricsRecord> records;  // D and dual_gap are NaN
  BaselineInvariants invariants;
  BaselineState final_state;
};

BaselineRunResult run_baseline(const ProblemInstance& instance, const GraphSequence& seq,
                               const BaselineConfig& config, const RunOptions& options,
                               const ReferenceSolution* reference = nullptr);

}  // namespace fdgm
