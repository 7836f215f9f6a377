#include "gpmle/kernel.hpp"

#include <cmath>
#include <sstream>

#include "gpmle/errors.hpp"

namespace gpmle {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935274463415059;
constexpr double kSqrt5 = 2.2360679774997896964091736687313;

}  // namespace

KernelSpec KernelSpec::squared_exponential(int dim) {
  KernelSpec spec{KernelFamily::SquaredExponential, 0.0, dim};
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::rational_quadratic(int dim, double nu) {
  KernelSpec spec{KernelFamily::RationalQuadratic, nu, dim};
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::matern(int dim, double nu) {
  KernelSpec spec{KernelFamily::Matern, nu, dim};
  spec.validate();
  return spec;
}

void KernelSpec::validate() const {
  if (dim < 1) throw ContractViolation("KernelSpec: dimension must be >= 1");
  if (family != KernelFamily::SquaredExponential && !(nu > 0.0 && std::isfinite(nu)))
    throw ContractViolation("KernelSpec: nu must be positive");
}

std::string KernelSpec::name() const {
  std::ostringstream os;
  switch (family) {
    case KernelFamily::SquaredExponential:
      os << "squared_exponential";
      break;
    case KernelFamily::RationalQuadratic:
      os << "rational_quadratic(" << nu << ")";
      break;
    case KernelFamily::Matern:
      os << "matern(" << nu << ")";
      break;
  }
  return os.str();
}

void ParamVector::validate(const KernelSpec& spec) const {
  if (ranges.size() != spec.dim)
    throw ContractViolation("ParamVector: number of ranges does not match kernel dimension");
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw ContractViolation("ParamVector: variance must be positive and finite");
  for (Eigen::Index k = 0; k < ranges.size(); ++k)
    if (!(ranges[k] > 0.0) || !std::isfinite(ranges[k]))
      throw ContractViolation("ParamVector: ranges must be positive and finite");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
    throw ContractViolation("ParamVector: noise variance must be non-negative");
  if (!std::isfinite(mean)) throw ContractViolation("ParamVector: mean must be finite");
}

void Dataset::validate() const {
  if (X.rows() < 1) throw ContractViolation("Dataset: at least one point is required");
  if (X.rows() != z.size())
    throw ContractViolation("Dataset: X and z have different numbers of rows");
}

double scaled_distance(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y,
                       const Eigen::Ref<const Eigen::VectorXd>& ranges) {
  if (x.size() != y.size() || x.size() != ranges.size())
    throw ContractViolation("scaled_distance: dimension mismatch");
  return ((x - y).array() / ranges.array()).matrix().norm();
}

double matern_bessel(double nu, double h) {
  if (h <= 0.0) return 1.0;
  const double z = std::sqrt(2.0 * nu) * h;
  const double bessel = std::cyl_bessel_k(nu, z);
  if (bessel == 0.0) return 0.0;
  const double log_r =
      (1.0 - nu) * std::log(2.0) - std::lgamma(nu) + nu * std::log(z) + std::log(bessel);
  return std::exp(log_r);
}

double correlation(const KernelSpec& spec, double h) {
  switch (spec.family) {
    case KernelFamily::SquaredExponential:
      return std::exp(-0.5 * h * h);
    case KernelFamily::RationalQuadratic:
      return std::pow(1.0 + h * h, -spec.nu);
    case KernelFamily::Matern:
      if (spec.nu == 2.5) {
        const double s5h = kSqrt5 * h;
        return (1.0 + s5h + (5.0 / 3.0) * h * h) * std::exp(-s5h);
      }
      if (spec.nu == 1.5) {
        const double s3h = kSqrt3 * h;
        return (1.0 + s3h) * std::exp(-s3h);
      }
      if (spec.nu == 0.5) return std::exp(-h);
      return matern_bessel(spec.nu, h);
  }
  return 0.0;
}

double correlation_dh2(const KernelSpec& spec, double h) {
  switch (spec.family) {
    case KernelFamily::SquaredExponential:
      return -0.5 * std::exp(-0.5 * h * h);
    case KernelFamily::RationalQuadratic:
      return -spec.nu * std::pow(1.0 + h * h, -spec.nu - 1.0);
    case KernelFamily::Matern: {
      const double nu = spec.nu;
      if (nu == 2.5) return -(5.0 / 6.0) * (1.0 + kSqrt5 * h) * std::exp(-kSqrt5 * h);
      if (nu == 1.5) return -1.5 * std::exp(-kSqrt3 * h);
      if (h <= 0.0) return nu > 1.0 ? -nu / (2.0 * (nu - 1.0)) : 0.0;
      if (nu == 0.5) return -std::exp(-h) / (2.0 * h);
      // d/dz [z^nu K_nu(z)] = -z^nu K_{nu-1}(z), z = sqrt(2 nu) h.
      const double z = std::sqrt(2.0 * nu) * h;
      const double bessel = std::cyl_bessel_k(std::abs(nu - 1.0), z);
      if (bessel == 0.0) return 0.0;
      const double log_mag = (1.0 - nu) * std::log(2.0) - std::lgamma(nu) + std::log(nu) +
                             (nu - 1.0) * std::log(z) + std::log(bessel);
      return -std::exp(log_mag);
    }
  }
  return 0.0;
}

Eigen::MatrixXd correlation_matrix(const KernelSpec& spec,
                                   const Eigen::Ref<const Eigen::VectorXd>& ranges,
                                   const Eigen::MatrixXd& X) {
  if (X.cols() != ranges.size())
    throw ContractViolation("correlation_matrix: dimension mismatch");
  const Eigen::Index n = X.rows();
  const Eigen::MatrixXd scaled = X * ranges.cwiseInverse().asDiagonal();
  Eigen::MatrixXd R(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    R(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double h = (scaled.row(i) - scaled.row(j)).norm();
      R(i, j) = R(j, i) = correlation(spec, h);
    }
  }
  return R;
}

Eigen::MatrixXd covariance_matrix(const KernelSpec& spec, const ParamVector& params,
                                  const Eigen::MatrixXd& X) {
  params.validate(spec);
  if (X.cols() != spec.dim) throw ContractViolation("covariance_matrix: dimension mismatch");
  Eigen::MatrixXd K = params.variance * correlation_matrix(spec, params.ranges, X);
  K.diagonal().array() += params.noise_variance;
  return K;
}

Eigen::VectorXd cross_covariance(const KernelSpec& spec, const ParamVector& params,
                                 const Eigen::MatrixXd& X,
                                 const Eigen::Ref<const Eigen::VectorXd>& x) {
  params.validate(spec);
  if (X.cols() != spec.dim || x.size() != spec.dim)
    throw ContractViolation("cross_covariance: dimension mismatch");
  Eigen::VectorXd k(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    k[i] = params.variance *
           correlation(spec, scaled_distance(X.row(i).transpose(), x, params.ranges));
  return k;
}

std::vector<Eigen::MatrixXd> covariance_gradient(const KernelSpec& spec,
                                                 const ParamVector& params,
                                                 const Eigen::MatrixXd& X) {
  params.validate(spec);
  if (X.cols() != spec.dim) throw ContractViolation("covariance_gradient: dimension mismatch");
  const Eigen::Index n = X.rows();
  const int d = spec.dim;

  std::vector<Eigen::MatrixXd> grads;
  grads.reserve(d + 2);
  grads.push_back(correlation_matrix(spec, params.ranges, X));
  for (int k = 0; k < d; ++k) grads.emplace_back(Eigen::MatrixXd::Zero(n, n));
  grads.emplace_back(Eigen::MatrixXd::Identity(n, n));

  // dr/drho_k = dr/dh^2 * (-2 (x_k - y_k)^2 / rho_k^3)
  const Eigen::ArrayXd inv_r3 = params.ranges.array().cube().inverse();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const Eigen::ArrayXd diff = (X.row(i) - X.row(j)).transpose().array();
      const double h = (diff / params.ranges.array()).matrix().norm();
      const double g = correlation_dh2(spec, h);
      for (int k = 0; k < d; ++k) {
        const double v = -2.0 * params.variance * g * diff[k] * diff[k] * inv_r3[k];
        grads[1 + k](i, j) = grads[1 + k](j, i) = v;
      }
    }
  }
  return grads;
}

}  // namespace gpmle
