#pragma once

// Centralized reference solutions plus numerical checks of the convergence
// guarantees of the dual method.

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdgm/graph.hpp"
#include "fdgm/oracle.hpp"
#include "fdgm/reference.hpp"
#include "fdgm/solver.hpp"

namespace fdgm {

constexpr double kCentralizedTolerance = 1e-12;

// Minimizes sum_i f_i(x) - c^T x over the intersected box. D_star = -F_star.
// Throws InfeasibleInstance if the intersected box is empty.
ReferenceSolution solve_centralized(const ProblemInstance& instance,
                                    double tol = kCentralizedTolerance,
                                    const Eigen::VectorXd& resource_target = Eigen::VectorXd());

// Largest r with B(0, r) inside every box: min over nodes and coordinates of
// min(-p, q). Infinite for unbounded boxes.
double inscribed_radius(const ProblemInstance& instance);

// Upper bound on ||w*||: (sum_i max_{||x||<=r} f_i(x) - F*) / r with the ball
// maximum replaced by lambda_max(A_i) r^2 + ||b_i|| r + gamma_i sqrt(d) r.
// r = inscribed radius; for unbounded boxes the radius minimizing the bound.
double dual_norm_bound(const ProblemInstance& instance, const ReferenceSolution& reference);

struct TheoryConstants {
  double rho = 0.0;
  double eta = 0.0;
  double lambda_lower = 0.0;  // min over windows of lambda_{n-1}(L of spanning tree)
  int varpi_upper = 0;        // max over windows of spanning-tree max degree
  int window = 1;
  double delta = 0.0;
  double alpha_hi = 0.0;
  double h_lower = 0.0;
  double lipschitz = 0.0;
  // m_tilde[t] = max_{s < t} ||w^{sB} - w*||; m_tilde[0] is a positive seed.
  std::vector<double> m_tilde;
  double m0_estimate = 0.0;
  double inscribed_radius = 0.0;
  double dual_norm_bound = 0.0;
};

// Needs run.window_starts (RunOptions::keep_window_starts) and a reference
// carrying w_star_estimate. Throws CertificationUnavailable when a window's
// union graph is disconnected or the step policy is unchecked.
TheoryConstants theory_constants(const StepSizePolicy& policy, const GraphSequence& seq,
                                 const ProblemInstance& instance, WeightKind weights,
                                 const RunResult& run, const ReferenceSolution& reference,
                                 int horizon);

// Right-hand side of the dual rate bound at iteration k.
double dual_rate_bound(const TheoryConstants& constants, double initial_gap, int k);

struct InequalityCheck {
  std::string name;
  int checks = 0;
  double worst_slack = 0.0;  // min over checks of (rhs - lhs); >= 0 means pass
  bool passed = true;
};

struct CertificationReport {
  std::vector<InequalityCheck> families;
  bool passed() const;
};

struct CertificationTolerances {
  double dual_rel = 1e-6;
  double dual_abs = 1e-8;
  double primal_abs = 1e-6;
  double objective_abs = 1e-6;
  double weak_duality_abs = 1e-6;
};

CertificationReport check_rate_bounds(const RunResult& run, const TheoryConstants& constants,
                                      const ReferenceSolution& reference,
                                      const CertificationTolerances& tol = {});

// One line per family: name, number of checks, worst slack, PASS/FAIL.
void write_report(std::ostream& out, const CertificationReport& report);

// Estimates w* by running the dual method for `steps` iterations and stores
// the final dual iterate in reference.w_star_estimate.
void estimate_dual_optimum(ReferenceSolution& reference, const ProblemInstance& instance,
                           const GraphSequence& seq, WeightKind weights,
                           const StepSizePolicy& policy, const InitSpec& init, int steps,
                           double oracle_tol = kDefaultOracleTolerance);

}  // namespace fdgm
