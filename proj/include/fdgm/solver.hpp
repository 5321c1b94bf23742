#pragma once

// The Fenchel dual gradient iteration: each node i holds a dual block w_i and
// a primal block x_i = argmax_{x in X_i} w_i^T x - f_i(x); at step k nodes
// with neighbors update
//   w_i <- w_i - alpha^k sum_{j in N_i^k} h_ij^k (x_i - x_j)
// and recompute x_i. Nodes without neighbors keep both blocks.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdgm/graph.hpp"
#include "fdgm/oracle.hpp"
#include "fdgm/reference.hpp"

namespace fdgm {

enum class DeltaRule { Spectral, ConservativeLhn, LaplacianDegree, MetropolisTwo, Manual };

std::string to_string(DeltaRule rule);
DeltaRule delta_rule_from_string(const std::string& name);

enum class ScheduleKind { Constant, UniformRandom, Explicit };

struct StepSizePolicy {
  DeltaRule rule = DeltaRule::Manual;
  double delta = 0.0;
  double alpha_lo = 0.0;  // only used by UniformRandom and for rho
  double alpha_hi = 0.0;
  ScheduleKind schedule = ScheduleKind::Constant;
  std::vector<double> explicit_steps;
  std::uint64_t seed = 0;
  // When false the interval check against 2/delta is skipped (empirically
  // tuned steps); certification is unavailable for such policies.
  bool enforce_step_condition = true;

  static StepSizePolicy constant(double delta, double alpha, DeltaRule rule = DeltaRule::Manual);

  // Throws InvalidConfig unless 0 < alpha_lo <= alpha_hi < 2/delta and every
  // explicit step lies in [alpha_lo, alpha_hi].
  void validate() const;

  // alpha^0 .. alpha^{horizon-1}
  std::vector<double> materialize(int horizon) const;

  // rho = min(a_lo - a_lo^2 delta/2, a_hi - a_hi^2 delta/2)
  double descent_constant() const;
};

// delta for a weight construction, following the admissibility condition
// H^k <= delta Lambda_L^{-1}. Spectral and LaplacianDegree scan the first
// `horizon` snapshots.
double compute_delta(DeltaRule rule, const ProblemInstance& instance, const GraphSequence& seq,
                     WeightKind weights, int horizon);

// Smallest eigenvalue of delta Lambda_L^{-1} - H^k over the first
// `max_snapshots` snapshots (all if negative).
double delta_condition_margin(double delta, const ProblemInstance& instance,
                              const GraphSequence& seq, WeightKind weights, int max_snapshots);

struct SolverState {
  int k = 0;
  Eigen::MatrixXd w;  // n-by-d, row i is w_i
  Eigen::MatrixXd x;  // n-by-d, row i is x_i
  Eigen::VectorXd c;  // resource target, sum_i w_i == c
};

enum class InitKind { Zeros, RandomSumC };

struct InitSpec {
  InitKind kind = InitKind::Zeros;
  std::uint64_t seed = 0;
  Eigen::VectorXd c;  // empty means zero
};

SolverState init_state(const ProblemInstance& instance, const InitSpec& init,
                       double tol = kDefaultOracleTolerance);

SolverState step(SolverState state, const ProblemInstance& instance, const GraphSnapshot& g,
                 const WeightMatrix& h, double alpha, double tol = kDefaultOracleTolerance);

// D(w) = sum_i d_i(w_i), evaluating the oracle.
double dual_value(const ProblemInstance& instance, const Eigen::MatrixXd& w,
                  double tol = kDefaultOracleTolerance);

// D(w) given the matching primal blocks x_i = x~_i(w_i).
double dual_value_at(const ProblemInstance& instance, const Eigen::MatrixXd& w,
                     const Eigen::MatrixXd& x);

// F(x) = sum_i f_i(x_i)
double primal_objective(const ProblemInstance& instance, const Eigen::MatrixXd& x);

// Component of x orthogonal to the consensus subspace: x_i - mean_j x_j.
Eigen::MatrixXd consensus_projection(const Eigen::MatrixXd& x);
double feasibility_gap(const Eigen::MatrixXd& x);

// Largest ||x_i - x_j|| over the snapshot's edges.
double edge_disagreement(const GraphSnapshot& g, const Eigen::MatrixXd& x);

struct MetricsRecord {
  int k = 0;
  double dual_value = 0.0;
  double dual_gap = 0.0;
  double primal_error = 0.0;  // mean_i ||x_i - x*||
  double feasibility_gap = 0.0;
  double objective_gap = 0.0;
  // Not part of the CSV schema; used by certification.
  double stacked_error = 0.0;  // ||x - 1 (x) x*||
  double dual_norm = 0.0;      // ||w||
};

struct RunOptions {
  int horizon = 1000;
  int record_every = 1;
  double oracle_tol = kDefaultOracleTolerance;
  bool keep_window_starts = false;  // store w^{tB}
};

struct InvariantSummary {
  int steps = 0;
  // max_k ||sum_i w_i^k - c|| / (1 + max_i ||w_i^k||)
  double worst_sum_ratio = 0.0;
  // max_k D(w^{k+1}) - D(w^k)
  double worst_dual_increase = -std::numeric_limits<double>::infinity();
  // max_k D(w^{k+1}) - D(w^k) + rho x^T (H (x) I) x
  double worst_descent_excess = -std::numeric_limits<double>::infinity();
  double min_dual_value = std::numeric_limits<double>::infinity();
  double final_edge_disagreement = 0.0;
};

struct RunResult {
  std::string label;
  std::vector<MetricsRecord> records;
  InvariantSummary invariants;
  std::vector<Eigen::MatrixXd> window_starts;
  // max_k ||w^k - w*|| when the reference carries a dual estimate
  double max_distance_to_w_star = 0.0;
  SolverState final_state;
};

RunResult run(const ProblemInstance& instance, const GraphSequence& seq, WeightKind weights,
              const StepSizePolicy& policy, const InitSpec& init, const RunOptions& options,
              const ReferenceSolution* reference = nullptr);

// Header k,D,dual_gap,primal_err,feas_gap,F_gap; 17 significant digits.
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records);

// Fills in primal_error, objective_gap, stacked_error, feasibility_gap for x.
// Without a reference, errors are measured against the mean block and
// objective_gap is left at zero.
void fill_primal_metrics(MetricsRecord& rec, const ProblemInstance& instance,
                         const Eigen::MatrixXd& x, const ReferenceSolution* reference,
                         const Eigen::VectorXd& c);

}  // namespace fdgm
