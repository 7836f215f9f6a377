#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpmle/kernel.hpp"
#include "gpmle/linalg.hpp"
#include "gpmle/mle.hpp"

namespace gpmle {

/// GP conditioned on a dataset with fixed parameters. Immutable once built;
/// prediction is thread-safe.
class FittedGP {
 public:
  FittedGP(KernelSpec spec, ParamVector params, Dataset data, const JitterOptions& jitter = {});

  const KernelSpec& spec() const { return spec_; }
  const ParamVector& params() const { return params_; }
  const Dataset& data() const { return data_; }
  const JitteredCholesky& chol() const { return chol_; }
  /// K^-1 (z - mu 1), K including the jitter that was needed.
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double jitter_used() const { return chol_.jitter_used(); }

  /// Number of posterior variances that came out slightly negative and were
  /// clamped to 0.
  std::uint64_t clamped_variances() const { return clamped_->load(); }

 private:
  friend double posterior_covariance(const FittedGP&, const Eigen::Ref<const Eigen::VectorXd>&,
                                     const Eigen::Ref<const Eigen::VectorXd>&);
  KernelSpec spec_;
  ParamVector params_;
  Dataset data_;
  JitteredCholesky chol_;
  Eigen::VectorXd alpha_;
  std::shared_ptr<std::atomic<std::uint64_t>> clamped_;
};

/// mu + k(x_n, x)^T K^-1 (z - mu 1).
double posterior_mean(const FittedGP& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Posterior means at every row of X.
Eigen::VectorXd posterior_mean_at(const FittedGP& model, const Eigen::MatrixXd& X);

/// k(x, y) - k(x_n, y)^T K^-1 k(x_n, x). For x == y the result is clamped
/// at 0 (and counted) when round-off makes it negative.
double posterior_covariance(const FittedGP& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& y);

double posterior_variance(const FittedGP& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Root mean squared prediction error on a test set.
double ermspe(const FittedGP& model, const Eigen::MatrixXd& test_X, const Eigen::VectorXd& test_z);

/// sqrt(SSR/SST) at the training points: RMS residual over the population
/// standard deviation of z. Throws ConstantData when z is constant.
double normalized_interp_error(const FittedGP& model);

struct LooRecord {
  int index = 0;
  double nll = 0.0;
  double sq_error = 0.0;
  ParamVector params;
  std::string error;  // non-empty when the refit failed

  bool failed() const { return !error.empty(); }
};

/// Leave-one-out with a full refit per fold. Fold i runs `scheme` on the
/// other n - 1 points with its own seed and records the squared error at
/// x_i. Failed folds are recorded, never thrown.
std::vector<LooRecord> loo_refit(const SchemeConfig& scheme, const KernelSpec& spec,
                                 const Dataset& data, int jobs = 1);

/// Mean squared error over the successful folds (NaN if none succeeded).
double loo_mse(const std::vector<LooRecord>& records);

}  // namespace gpmle
