#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gpmle {

/// Jitter escalation used whenever a covariance matrix is factorized.
///
/// The first attempt adds `min_jitter` (absolute). Each subsequent attempt
/// adds `level * variance` for the next entry of `ladder`, which must be
/// strictly increasing.
struct JitterOptions {
  double min_jitter = 1e-8;
  std::vector<double> ladder = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2};

  /// Ladder from 1e-6 to 1e-1 (relative to the variance).
  static JitterOptions short_ladder();
  /// No escalation at all: a single attempt with `min_jitter`.
  static JitterOptions fixed(double jitter);
  void validate() const;
};

/// Lower Cholesky factor of K + jitter_used * I.
class JitteredCholesky {
 public:
  JitteredCholesky(Eigen::LLT<Eigen::MatrixXd> llt, double jitter_used, int attempts);

  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }
  Eigen::MatrixXd matrix_l() const { return llt_.matrixL(); }
  double jitter_used() const { return jitter_used_; }
  int attempts() const { return attempts_; }
  Eigen::Index size() const { return llt_.rows(); }

  Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& b) const;
  Eigen::MatrixXd solve_matrix(const Eigen::Ref<const Eigen::MatrixXd>& b) const;
  Eigen::MatrixXd inverse() const;
  double log_det() const;

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_used_;
  int attempts_;
};

/// Factorizes K + jitter * I, walking the jitter ladder until all pivots are
/// strictly positive and finite. Throws AllJitterFailed otherwise.
JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& K, double variance,
                                      const JitterOptions& options = {});

Eigen::VectorXd solve(const JitteredCholesky& chol, const Eigen::Ref<const Eigen::VectorXd>& b);
Eigen::MatrixXd solve_matrix(const JitteredCholesky& chol, const Eigen::Ref<const Eigen::MatrixXd>& b);
double log_det(const JitteredCholesky& chol);

struct ConditioningReport {
  Eigen::VectorXd eigenvalues;  // descending
  double kappa = 0.0;
  double kappa_logdet = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double sum_log_eigenvalues = 0.0;
};

/// Condition number of K and local condition number of A -> log|A| at K
/// from a full symmetric eigendecomposition. Throws DegenerateLogDet when
/// |sum log lambda_i| < 1e-12 and ContractViolation when K is not positive
/// definite.
ConditioningReport conditioning_report(const Eigen::MatrixXd& K);

enum class NoiseQuantity { QuadraticForm, LogDet, FullNll };

struct NoiseEstimate {
  double delta = 0.0;
  std::string transect;
  NoiseQuantity quantity = NoiseQuantity::FullNll;
};

/// Samples f at `num_points` equispaced points of [center - half_width,
/// center + half_width], fits a quadratic by least squares and returns the
/// standard deviation of the residuals relative to |mean f|.
NoiseEstimate measure_numerical_noise(const std::function<double(double)>& f, double center,
                                      double half_width, int num_points = 100,
                                      NoiseQuantity quantity = NoiseQuantity::FullNll,
                                      std::string transect = {});

}  // namespace gpmle
