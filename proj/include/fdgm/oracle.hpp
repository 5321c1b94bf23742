#pragma once

// Local problems f_i(x) = x^T A x + b^T x + gamma ||x||_1 over a box, and the
// conjugate oracle x~(w) = argmax_{x in box} w^T x - f_i(x).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace fdgm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class LocalProblem {
 public:
  // Validates symmetry, positive definiteness, gamma >= 0 and
  // lower < 0 < upper. Bounds may be infinite.
  LocalProblem(MatrixXd quad, VectorXd linear, double l1_weight, VectorXd lower, VectorXd upper);

  int dim() const { return static_cast<int>(linear_.size()); }
  const MatrixXd& quad() const { return quad_; }
  const VectorXd& linear() const { return linear_; }
  double l1_weight() const { return l1_weight_; }
  const VectorXd& lower() const { return lower_; }
  const VectorXd& upper() const { return upper_; }

  // theta_i = lambda_min(A_i) and L_i = 1 / theta_i.
  double convexity() const { return lambda_min_; }
  double lipschitz() const { return 1.0 / lambda_min_; }
  double lambda_max() const { return lambda_max_; }
  bool box_is_unbounded() const;

  // Unconstrained maximizer (2A)^{-1}(w - b) of w^T x - x^T A x - b^T x.
  VectorXd unconstrained_argmax(const VectorXd& w) const;

 private:
  MatrixXd quad_;
  VectorXd linear_;
  double l1_weight_;
  VectorXd lower_;
  VectorXd upper_;
  double lambda_min_;
  double lambda_max_;
  Eigen::LLT<MatrixXd> twice_quad_llt_;
};

class ProblemInstance {
 public:
  explicit ProblemInstance(std::vector<LocalProblem> locals);

  int node_count() const { return static_cast<int>(locals_.size()); }
  int dim() const { return locals_.front().dim(); }
  const LocalProblem& local(int i) const { return locals_.at(i); }
  const std::vector<LocalProblem>& locals() const { return locals_; }

  double theta_min() const { return theta_min_; }
  double lipschitz() const { return 1.0 / theta_min_; }  // L = max_i L_i
  std::vector<double> lipschitz_constants() const;
  bool unconstrained() const;

 private:
  std::vector<LocalProblem> locals_;
  double theta_min_;
};

constexpr double kDefaultOracleTolerance = 1e-10;
constexpr int kOracleIterationCap = 100000;

// Accelerated proximal gradient for
//   minimize x^T Q x + c^T x + gamma ||x||_1  s.t.  lower <= x <= upper
// with Q symmetric positive definite. Stops when the gradient-map norm is at
// most tol; throws OracleFailure after max_iter iterations.
VectorXd solve_box_l1_qp(const MatrixXd& quad, const VectorXd& linear, double l1_weight,
                         const VectorXd& lower, const VectorXd& upper, double lambda_min,
                         double lambda_max, double tol, const VectorXd* warm_start = nullptr,
                         int max_iter = kOracleIterationCap);

VectorXd conjugate_argmax(const LocalProblem& lp, const VectorXd& w,
                          double tol = kDefaultOracleTolerance,
                          const VectorXd* warm_start = nullptr);

double conjugate_value(const LocalProblem& lp, const VectorXd& w,
                       double tol = kDefaultOracleTolerance);

double objective_value(const LocalProblem& lp, const VectorXd& x);

// soft-threshold by `threshold`, then clip to [lower, upper]
VectorXd prox_l1_box(const VectorXd& v, double threshold, const VectorXd& lower,
                     const VectorXd& upper);

struct InstanceSpec {
  int node_count = 50;
  int dim = 5;
  double theta_lo = 2.0;
  double theta_hi = 3.0;
  double box_lo = 0.5;   // |p|, q drawn per coordinate from [box_lo, box_hi]
  double box_hi = 2.0;
  double b_lo = -5.0;
  double b_hi = 5.0;
  double l1_weight = -1.0;  // negative means 1/n
  bool unconstrained = false;  // infinite boxes
  std::uint64_t seed = 0;
};

ProblemInstance generate_instance(const InstanceSpec& spec);

void write_instance(std::ostream& out, const ProblemInstance& instance);
ProblemInstance read_instance(std::istream& in);

}  // namespace fdgm
