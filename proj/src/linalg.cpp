#include "gpmle/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "gpmle/errors.hpp"

namespace gpmle {

JitterOptions JitterOptions::short_ladder() {
  JitterOptions options;
  options.ladder = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  return options;
}

JitterOptions JitterOptions::fixed(double jitter) {
  JitterOptions options;
  options.min_jitter = jitter;
  options.ladder.clear();
  return options;
}

void JitterOptions::validate() const {
  if (!(min_jitter >= 0.0) || !std::isfinite(min_jitter))
    throw ContractViolation("JitterOptions: min_jitter must be non-negative");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0) || !std::isfinite(ladder[i]))
      throw ContractViolation("JitterOptions: ladder levels must be positive");
    if (i > 0 && !(ladder[i] > ladder[i - 1]))
      throw ContractViolation("JitterOptions: ladder must be strictly increasing");
  }
}

JitteredCholesky::JitteredCholesky(Eigen::LLT<Eigen::MatrixXd> llt, double jitter_used,
                                   int attempts)
    : llt_(std::move(llt)), jitter_used_(jitter_used), attempts_(attempts) {}

Eigen::VectorXd JitteredCholesky::solve(const Eigen::Ref<const Eigen::VectorXd>& b) const {
  if (b.size() != size()) throw ContractViolation("solve: shape mismatch");
  return llt_.solve(b);
}

Eigen::MatrixXd JitteredCholesky::solve_matrix(const Eigen::Ref<const Eigen::MatrixXd>& b) const {
  if (b.rows() != size()) throw ContractViolation("solve: shape mismatch");
  return llt_.solve(b);
}

Eigen::MatrixXd JitteredCholesky::inverse() const {
  return llt_.solve(Eigen::MatrixXd::Identity(size(), size()));
}

double JitteredCholesky::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

namespace {

bool factor_ok(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const auto diag = llt.matrixLLT().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i)
    if (!(diag[i] > 0.0) || !std::isfinite(diag[i])) return false;
  return true;
}

}  // namespace

JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& K, double variance,
                                      const JitterOptions& options) {
  if (K.rows() != K.cols()) throw ContractViolation("cholesky_with_jitter: matrix not square");
  options.validate();

  Eigen::MatrixXd work = K;
  int attempts = 0;
  auto attempt = [&](double jitter) -> std::optional<JitteredCholesky> {
    ++attempts;
    work = K;
    work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (!factor_ok(llt)) return std::nullopt;
    return JitteredCholesky(std::move(llt), jitter, attempts);
  };

  if (auto chol = attempt(options.min_jitter)) return std::move(*chol);
  for (double level : options.ladder) {
    const double jitter = std::max(options.min_jitter, level * variance);
    if (auto chol = attempt(jitter)) return std::move(*chol);
  }
  std::ostringstream os;
  os << "Cholesky factorization failed for every jitter level (" << attempts
     << " attempts, n = " << K.rows() << ")";
  throw AllJitterFailed(os.str());
}

Eigen::VectorXd solve(const JitteredCholesky& chol, const Eigen::Ref<const Eigen::VectorXd>& b) {
  return chol.solve(b);
}

Eigen::MatrixXd solve_matrix(const JitteredCholesky& chol, const Eigen::Ref<const Eigen::MatrixXd>& b) {
  return chol.solve_matrix(b);
}

double log_det(const JitteredCholesky& chol) { return chol.log_det(); }

ConditioningReport conditioning_report(const Eigen::MatrixXd& K) {
  if (K.rows() != K.cols() || K.rows() == 0)
    throw ContractViolation("conditioning_report: matrix must be square and non-empty");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw ContractViolation("conditioning_report: eigendecomposition failed");

  ConditioningReport report;
  report.eigenvalues = eig.eigenvalues().reverse();
  const Eigen::VectorXd& lambda = report.eigenvalues;
  const double lmax = lambda[0];
  const double lmin = lambda[lambda.size() - 1];
  if (!(lmin > 0.0)) throw ContractViolation("conditioning_report: matrix is not positive definite");

  report.sum_log_eigenvalues = lambda.array().log().sum();
  const double abs_sum_log = std::abs(report.sum_log_eigenvalues);
  if (abs_sum_log < 1e-12)
    throw DegenerateLogDet("conditioning_report: sum of log-eigenvalues vanishes");

  report.kappa = lmax / lmin;
  const Eigen::ArrayXd scaled = lambda.array() / lmax;
  const double product = scaled.square().sum() * scaled.square().inverse().sum();
  const double n = static_cast<double>(lambda.size());
  report.lower_bound = report.kappa / abs_sum_log;
  report.upper_bound = n * report.kappa / abs_sum_log;
  // The sandwich holds in exact arithmetic; clamp the few-ulp round-off.
  report.kappa_logdet =
      std::clamp(std::sqrt(product) / abs_sum_log, report.lower_bound, report.upper_bound);
  return report;
}

NoiseEstimate measure_numerical_noise(const std::function<double(double)>& f, double center,
                                      double half_width, int num_points, NoiseQuantity quantity,
                                      std::string transect) {
  if (num_points < 10) throw ContractViolation("measure_numerical_noise: need >= 10 points");
  if (!(half_width > 0.0)) throw ContractViolation("measure_numerical_noise: half_width <= 0");

  Eigen::MatrixXd design(num_points, 3);
  Eigen::VectorXd values(num_points);
  for (int i = 0; i < num_points; ++i) {
    const double u = -1.0 + 2.0 * i / (num_points - 1);
    const double v = f(center + half_width * u);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "measure_numerical_noise: non-finite value at t = " << center + half_width * u;
      throw EvaluationError(os.str());
    }
    design(i, 0) = 1.0;
    design(i, 1) = u;
    design(i, 2) = u * u;
    values[i] = v;
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(values);
  const Eigen::VectorXd residuals = values - design * coef;
  const double mean_abs = std::abs(values.mean());
  if (mean_abs == 0.0) throw ContractViolation("measure_numerical_noise: mean of f is zero");
  const double centered_mean = residuals.mean();
  const double sd =
      std::sqrt((residuals.array() - centered_mean).square().sum() / num_points);

  NoiseEstimate est;
  est.delta = sd / mean_abs;
  est.quantity = quantity;
  if (transect.empty()) {
    std::ostringstream os;
    os << "t in [" << center - half_width << ", " << center + half_width << "], " << num_points
       << " points";
    transect = os.str();
  }
  est.transect = std::move(transect);
  return est;
}

}  // namespace gpmle
