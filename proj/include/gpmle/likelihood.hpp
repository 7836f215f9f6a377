#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gpmle/kernel.hpp"
#include "gpmle/linalg.hpp"

namespace gpmle {

enum class ReparamKind { Log, InvSoftplus };

/// Componentwise monotone map tau between positive parameters and the
/// unconstrained optimization space.
///
///   Log:            tau(t) = log t,                  tau^-1(u) = exp u
///   InvSoftplus(s): tau(t) = log(exp(t / s) - 1),    tau^-1(u) = s log(exp u + 1)
///
/// InvSoftplus holds one scale per positive parameter, ordered as the
/// positive coordinates of ParamLayout (variance, ranges, [noise]).
struct Reparam {
  ReparamKind kind = ReparamKind::Log;
  std::vector<double> scales;

  static Reparam log();
  static Reparam inv_softplus(std::vector<double> scales);

  void validate(std::size_t num_positive) const;
  double forward(double theta, std::size_t index) const;
  double backward(double theta_prime, std::size_t index) const;
  /// d theta / d theta' at theta'.
  double derivative(double theta_prime, std::size_t index) const;
};

/// Throws NonPositiveParam if some component is <= 0.
Eigen::VectorXd reparam_forward(const Reparam& reparam, const Eigen::VectorXd& theta);
Eigen::VectorXd reparam_backward(const Reparam& reparam, const Eigen::VectorXd& theta_prime);

/// Coordinates seen by the optimizer:
/// [tau(sigma^2), tau(rho_1), ..., tau(rho_d), (tau(sigma_eps^2)), mu].
/// The noise variance is only a free coordinate when `estimate_noise` is set;
/// otherwise it keeps the value supplied to unpack().
struct ParamLayout {
  int dim = 1;
  bool estimate_noise = false;

  int num_positive() const { return dim + 1 + (estimate_noise ? 1 : 0); }
  int size() const { return num_positive() + 1; }

  Eigen::VectorXd positive_values(const ParamVector& params) const;
  Eigen::VectorXd pack(const ParamVector& params, const Reparam& reparam) const;
  ParamVector unpack(const Eigen::VectorXd& x, const Reparam& reparam,
                     double fixed_noise_variance) const;
};

struct LikelihoodOptions {
  JitterOptions jitter;
  bool estimate_noise = false;
};

struct NllValueGrad {
  double value = 0.0;
  /// Gradient over the layout coordinates (transformed positives, then mu).
  Eigen::VectorXd grad;
  /// Same gradient in natural coordinates (sigma^2, rho, [sigma_eps^2], mu).
  Eigen::VectorXd grad_natural;
  double jitter_used = 0.0;
};

/// 1/2 (z - mu 1)^T K^-1 (z - mu 1) + 1/2 log|K| + (n/2) log(2 pi),
/// with K = K_theta + jitter I factorized once.
double nll(const KernelSpec& spec, const ParamVector& params, const Dataset& data,
           const JitterOptions& jitter = {});

/// NLL value and analytic gradient at O(n^3 + d n^2) cost.
NllValueGrad nll_grad(const KernelSpec& spec, const ParamVector& params, const Dataset& data,
                      const Reparam& reparam, const LikelihoodOptions& options = {});

struct ProfiledMeanVar {
  double mean = 0.0;
  double variance = 0.0;
  double jitter_used = 0.0;
};

/// Generalized least squares mean and variance for fixed ranges, with the
/// unit-variance correlation matrix R + alpha I. Throws DegenerateProfile if
/// the variance estimate is not strictly positive and finite.
ProfiledMeanVar profile_mean_var(const KernelSpec& spec,
                                 const Eigen::Ref<const Eigen::VectorXd>& ranges, double alpha,
                                 const Dataset& data, const JitterOptions& jitter = {});

}  // namespace gpmle
