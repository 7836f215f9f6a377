#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gpmle {

enum class KernelFamily { SquaredExponential, RationalQuadratic, Matern };

/// Stationary correlation family r(h) together with the input dimension.
///
/// `nu` is the exponent of the rational quadratic or the regularity of the
/// Matern family; it is ignored for the squared exponential.
struct KernelSpec {
  KernelFamily family = KernelFamily::Matern;
  double nu = 2.5;
  int dim = 1;

  static KernelSpec squared_exponential(int dim);
  static KernelSpec rational_quadratic(int dim, double nu = 1.0);
  static KernelSpec matern(int dim, double nu = 2.5);

  /// Throws ContractViolation unless nu > 0 (where used) and dim >= 1.
  void validate() const;
  std::string name() const;
};

/// Hyperparameters (variance, ranges, noise variance) plus the constant mean.
struct ParamVector {
  double variance = 1.0;
  Eigen::VectorXd ranges;
  double noise_variance = 0.0;
  double mean = 0.0;

  int dim() const { return static_cast<int>(ranges.size()); }
  void validate(const KernelSpec& spec) const;
};

struct DatasetMeta {
  std::string function;
  std::string design;
  std::uint64_t seed = 0;
};

/// Design points (one row per point) and observations.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd z;
  std::optional<DatasetMeta> meta;

  int n() const { return static_cast<int>(X.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }
  void validate() const;
};

/// h = sqrt(sum_k (x_k - y_k)^2 / rho_k^2).
double scaled_distance(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y,
                       const Eigen::Ref<const Eigen::VectorXd>& ranges);

/// r(h) for the given family; r(0) = 1.
double correlation(const KernelSpec& spec, double h);

/// dr/d(h^2) evaluated at h. Finite at h = 0 whenever the limit exists,
/// and defined as 0 otherwise (Matern with nu <= 1).
double correlation_dh2(const KernelSpec& spec, double h);

/// Matern correlation through the Bessel-function expression, for any nu.
double matern_bessel(double nu, double h);

/// K = [sigma^2 r(h(x_i, x_j))] + sigma_eps^2 I.
Eigen::MatrixXd covariance_matrix(const KernelSpec& spec, const ParamVector& params,
                                  const Eigen::MatrixXd& X);

/// Correlation matrix [r(h(x_i, x_j))] (unit variance, no noise).
Eigen::MatrixXd correlation_matrix(const KernelSpec& spec,
                                   const Eigen::Ref<const Eigen::VectorXd>& ranges,
                                   const Eigen::MatrixXd& X);

/// Entry i is sigma^2 r(h(x_i, x)); no noise term.
Eigen::VectorXd cross_covariance(const KernelSpec& spec, const ParamVector& params,
                                 const Eigen::MatrixXd& X,
                                 const Eigen::Ref<const Eigen::VectorXd>& x);

/// dK/dtheta_j for theta = (sigma^2, rho_1..rho_d, sigma_eps^2), in that order.
std::vector<Eigen::MatrixXd> covariance_gradient(const KernelSpec& spec,
                                                 const ParamVector& params,
                                                 const Eigen::MatrixXd& X);

}  // namespace gpmle
