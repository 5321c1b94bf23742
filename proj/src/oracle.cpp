#include "fdgm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "fdgm/error.hpp"

namespace fdgm {

LocalProblem::LocalProblem(MatrixXd quad, VectorXd linear, double l1_weight, VectorXd lower,
                           VectorXd upper)
    : quad_(std::move(quad)), linear_(std::move(linear)), l1_weight_(l1_weight),
      lower_(std::move(lower)), upper_(std::move(upper)) {
  const auto d = linear_.size();
  if (d == 0) throw InvalidInput("local problem dimension must be positive");
  if (quad_.rows() != d || quad_.cols() != d || lower_.size() != d || upper_.size() != d) {
    throw InvalidInput("local problem dimensions disagree");
  }
  if (!quad_.allFinite() || !linear_.allFinite()) throw InvalidInput("non-finite A or b");
  const double scale = std::max(1.0, quad_.cwiseAbs().maxCoeff());
  if ((quad_ - quad_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidInput("quadratic term A is not symmetric");
  }
  if (!(l1_weight_ >= 0.0) || !std::isfinite(l1_weight_)) {
    throw InvalidInput("l1 weight must be finite and >= 0");
  }
  for (Eigen::Index k = 0; k < d; ++k) {
    if (!(lower_(k) < 0.0 && upper_(k) > 0.0)) {
      throw InvalidInput("box must satisfy lower < 0 < upper in every coordinate");
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(quad_, Eigen::EigenvaluesOnly);
  lambda_min_ = eig.eigenvalues().minCoeff();
  lambda_max_ = eig.eigenvalues().maxCoeff();
  if (!(lambda_min_ > 0.0)) throw InvalidInput("quadratic term A is not positive definite");
  twice_quad_llt_.compute(2.0 * quad_);
}

bool LocalProblem::box_is_unbounded() const {
  return lower_.array().isInf().all() && upper_.array().isInf().all();
}

VectorXd LocalProblem::unconstrained_argmax(const VectorXd& w) const {
  return twice_quad_llt_.solve(w - linear_);
}

ProblemInstance::ProblemInstance(std::vector<LocalProblem> locals) : locals_(std::move(locals)) {
  if (locals_.size() < 2) throw InvalidInput("instance needs n >= 2 local problems");
  theta_min_ = std::numeric_limits<double>::infinity();
  for (const auto& lp : locals_) {
    if (lp.dim() != locals_.front().dim()) throw InvalidInput("local dimensions differ");
    theta_min_ = std::min(theta_min_, lp.convexity());
  }
}

std::vector<double> ProblemInstance::lipschitz_constants() const {
  std::vector<double> out;
  out.reserve(locals_.size());
  for (const auto& lp : locals_) out.push_back(lp.lipschitz());
  return out;
}

bool ProblemInstance::unconstrained() const {
  return std::all_of(locals_.begin(), locals_.end(), [](const LocalProblem& lp) {
    return lp.box_is_unbounded() && lp.l1_weight() == 0.0;
  });
}

VectorXd prox_l1_box(const VectorXd& v, double threshold, const VectorXd& lower,
                     const VectorXd& upper) {
  VectorXd out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    double s = v(k);
    if (threshold > 0.0) {
      s = s > threshold ? s - threshold : (s < -threshold ? s + threshold : 0.0);
    }
    out(k) = std::clamp(s, lower(k), upper(k));
  }
  return out;
}

VectorXd solve_box_l1_qp(const MatrixXd& quad, const VectorXd& linear, double l1_weight,
                         const VectorXd& lower, const VectorXd& upper, double lambda_min,
                         double lambda_max, double tol, const VectorXd* warm_start,
                         int max_iter) {
  if (!(tol > 0.0)) throw InvalidInput("oracle tolerance must be positive");
  const double smooth_lip = 2.0 * lambda_max;
  const double strong = 2.0 * lambda_min;
  const double step = 1.0 / smooth_lip;
  const double momentum =
      (std::sqrt(smooth_lip) - std::sqrt(strong)) / (std::sqrt(smooth_lip) + std::sqrt(strong));
  const double threshold = step * l1_weight;

  auto gradient = [&](const VectorXd& x) -> VectorXd { return 2.0 * (quad * x) + linear; };
  auto residual = [&](const VectorXd& x) {
    VectorXd p = prox_l1_box(x - step * gradient(x), threshold, lower, upper);
    return (x - p).norm() / step;
  };

  VectorXd x = warm_start ? prox_l1_box(*warm_start, 0.0, lower, upper)
                          : VectorXd(VectorXd::Zero(linear.size()));
  double res = residual(x);
  if (res <= tol) return x;
  VectorXd x_prev = x;
  for (int it = 0; it < max_iter; ++it) {
    VectorXd y = x + momentum * (x - x_prev);
    x_prev = x;
    x = prox_l1_box(y - step * gradient(y), threshold, lower, upper);
    res = residual(x);
    if (res <= tol) return x;
  }
  throw OracleFailure("box/l1 QP solver did not reach tolerance in " + std::to_string(max_iter) +
                          " iterations",
                      res);
}

VectorXd conjugate_argmax(const LocalProblem& lp, const VectorXd& w, double tol,
                          const VectorXd* warm_start) {
  if (w.size() != lp.dim()) throw InvalidInput("dual vector has wrong dimension");
  if (lp.l1_weight() == 0.0) {
    VectorXd x = lp.unconstrained_argmax(w);
    if ((x.array() >= lp.lower().array()).all() && (x.array() <= lp.upper().array()).all()) {
      return x;
    }
  }
  // max w^T x - f(x)  <=>  min x^T A x + (b - w)^T x + gamma ||x||_1
  return solve_box_l1_qp(lp.quad(), lp.linear() - w, lp.l1_weight(), lp.lower(), lp.upper(),
                         lp.convexity(), lp.lambda_max(), tol, warm_start);
}

double conjugate_value(const LocalProblem& lp, const VectorXd& w, double tol) {
  VectorXd x = conjugate_argmax(lp, w, tol);
  return w.dot(x) - objective_value(lp, x);
}

double objective_value(const LocalProblem& lp, const VectorXd& x) {
  return x.dot(lp.quad() * x) + lp.linear().dot(x) + lp.l1_weight() * x.lpNorm<1>();
}

ProblemInstance generate_instance(const InstanceSpec& spec) {
  if (spec.node_count < 2) throw InvalidInput("instance: n must be >= 2");
  if (spec.dim < 1) throw InvalidInput("instance: d must be >= 1");
  if (!(0.0 < spec.theta_lo && spec.theta_lo < spec.theta_hi)) {
    throw InvalidInput("instance: theta range must satisfy 0 < lo < hi");
  }
  if (!spec.unconstrained && !(0.0 < spec.box_lo && spec.box_lo <= spec.box_hi)) {
    throw InvalidInput("instance: box range must satisfy 0 < lo <= hi");
  }
  if (!(spec.b_lo <= spec.b_hi)) throw InvalidInput("instance: b range must satisfy lo <= hi");

  const int n = spec.node_count;
  const int d = spec.dim;
  const double gamma =
      spec.unconstrained ? 0.0 : (spec.l1_weight < 0.0 ? 1.0 / n : spec.l1_weight);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> eig_dist(spec.theta_lo, spec.theta_hi);
  std::uniform_real_distribution<double> b_dist(spec.b_lo, spec.b_hi);
  std::uniform_real_distribution<double> box_dist(spec.box_lo, spec.box_hi);
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<LocalProblem> locals;
  locals.reserve(n);
  for (int i = 0; i < n; ++i) {
    MatrixXd g(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) g(r, c) = gauss(rng);
    Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = qr.householderQ();
    VectorXd lambda(d);
    for (int k = 0; k < d; ++k) lambda(k) = eig_dist(rng);
    MatrixXd a = q * lambda.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose()).eval();
    VectorXd b(d);
    for (int k = 0; k < d; ++k) b(k) = b_dist(rng);
    VectorXd lower(d), upper(d);
    for (int k = 0; k < d; ++k) {
      if (spec.unconstrained) {
        lower(k) = -inf;
        upper(k) = inf;
      } else {
        lower(k) = -box_dist(rng);
        upper(k) = box_dist(rng);
      }
    }
    locals.emplace_back(std::move(a), std::move(b), gamma, std::move(lower), std::move(upper));
  }
  return ProblemInstance(std::move(locals));
}

namespace {

nlohmann::json encode(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double decode(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw InvalidInput("instance file: bad number '" + s + "'");
  }
  return j.get<double>();
}

nlohmann::json encode(const VectorXd& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(encode(v(k)));
  return arr;
}

VectorXd decode_vector(const nlohmann::json& j) {
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = decode(j[k]);
  return v;
}

}  // namespace

void write_instance(std::ostream& out, const ProblemInstance& instance) {
  nlohmann::json doc;
  doc["format"] = "fdgm-instance";
  doc["version"] = 1;
  doc["node_count"] = instance.node_count();
  doc["dim"] = instance.dim();
  auto locals = nlohmann::json::array();
  for (const auto& lp : instance.locals()) {
    nlohmann::json item;
    auto rows = nlohmann::json::array();  // row-major
    for (int r = 0; r < lp.dim(); ++r) rows.push_back(encode(VectorXd(lp.quad().row(r).transpose())));
    item["A"] = rows;
    item["b"] = encode(lp.linear());
    item["gamma"] = lp.l1_weight();
    item["lower"] = encode(lp.lower());
    item["upper"] = encode(lp.upper());
    locals.push_back(std::move(item));
  }
  doc["locals"] = std::move(locals);
  out << doc.dump(1) << '\n';
}

ProblemInstance read_instance(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
    if (doc.at("format") != "fdgm-instance") throw InvalidInput("instance file: wrong format tag");
    std::vector<LocalProblem> locals;
    for (const auto& item : doc.at("locals")) {
      const auto& rows = item.at("A");
      const auto d = static_cast<Eigen::Index>(rows.size());
      MatrixXd a(d, d);
      for (Eigen::Index r = 0; r < d; ++r) a.row(r) = decode_vector(rows[r]).transpose();
      locals.emplace_back(std::move(a), decode_vector(item.at("b")),
                          item.at("gamma").get<double>(), decode_vector(item.at("lower")),
                          decode_vector(item.at("upper")));
    }
    return ProblemInstance(std::move(locals));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("instance file: ") + e.what());
  }
}

}  // namespace fdgm
