#pragma once

#include <optional>

#include <Eigen/Dense>

namespace fdgm {

// Centralized optimum of the consensus problem; produced by certify and
// consumed by the run loops for gap metrics.
struct ReferenceSolution {
  Eigen::VectorXd x_star;
  double F_star = 0.0;
  double D_star = 0.0;  // == -F_star
  // Near-optimal dual point (n-by-d), filled in by a long run when requested.
  std::optional<Eigen::MatrixXd> w_star_estimate;
  double tolerance = 0.0;
};

}  // namespace fdgm
