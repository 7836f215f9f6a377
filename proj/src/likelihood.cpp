#include "gpmle/likelihood.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gpmle/errors.hpp"

namespace gpmle {

namespace {

double log1pexp(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// log(exp(x) - 1) for x > 0.
double logexpm1(double x) { return x + std::log(-std::expm1(-x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_two_pi() { return std::log(2.0 * std::numbers::pi); }

// Pairwise scaled distances of the rows of X.
Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& X,
                                const Eigen::Ref<const Eigen::VectorXd>& ranges) {
  const Eigen::Index n = X.rows();
  const Eigen::MatrixXd scaled = X * ranges.cwiseInverse().asDiagonal();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) H(i, j) = H(j, i) = (scaled.row(i) - scaled.row(j)).norm();
  return H;
}

Eigen::MatrixXd correlation_from_distances(const KernelSpec& spec, const Eigen::MatrixXd& H) {
  const Eigen::Index n = H.rows();
  Eigen::MatrixXd R(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    R(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) R(i, j) = R(j, i) = correlation(spec, H(i, j));
  }
  return R;
}

void check_inputs(const KernelSpec& spec, const ParamVector& params, const Dataset& data) {
  spec.validate();
  params.validate(spec);
  data.validate();
  if (data.dim() != spec.dim) throw ContractViolation("likelihood: data dimension mismatch");
}

struct Factorized {
  JitteredCholesky chol;
  Eigen::VectorXd alpha;  // K^-1 (z - mu 1)
  double value;
};

Factorized factor_and_value(const Eigen::MatrixXd& K, const ParamVector& params,
                            const Dataset& data, const JitterOptions& jitter) {
  JitteredCholesky chol = cholesky_with_jitter(K, params.variance, jitter);
  const Eigen::VectorXd residual = data.z.array() - params.mean;
  Eigen::VectorXd alpha = chol.solve(residual);
  const double n = static_cast<double>(data.n());
  const double value = 0.5 * residual.dot(alpha) + 0.5 * chol.log_det() + 0.5 * n * log_two_pi();
  return {std::move(chol), std::move(alpha), value};
}

}  // namespace

Reparam Reparam::log() { return Reparam{ReparamKind::Log, {}}; }

Reparam Reparam::inv_softplus(std::vector<double> scales) {
  return Reparam{ReparamKind::InvSoftplus, std::move(scales)};
}

void Reparam::validate(std::size_t num_positive) const {
  if (kind == ReparamKind::Log) return;
  if (scales.size() != num_positive) {
    std::ostringstream os;
    os << "Reparam: expected " << num_positive << " scales, got " << scales.size();
    throw ContractViolation(os.str());
  }
  for (double s : scales)
    if (!(s > 0.0) || !std::isfinite(s)) throw ContractViolation("Reparam: scales must be positive");
}

double Reparam::forward(double theta, std::size_t index) const {
  if (!(theta > 0.0)) throw NonPositiveParam("reparam_forward: parameter must be positive");
  if (kind == ReparamKind::Log) return std::log(theta);
  return logexpm1(theta / scales.at(index));
}

double Reparam::backward(double theta_prime, std::size_t index) const {
  if (kind == ReparamKind::Log) return std::exp(theta_prime);
  return scales.at(index) * log1pexp(theta_prime);
}

double Reparam::derivative(double theta_prime, std::size_t index) const {
  if (kind == ReparamKind::Log) return std::exp(theta_prime);
  return scales.at(index) * sigmoid(theta_prime);
}

Eigen::VectorXd reparam_forward(const Reparam& reparam, const Eigen::VectorXd& theta) {
  reparam.validate(static_cast<std::size_t>(theta.size()));
  Eigen::VectorXd out(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    out[i] = reparam.forward(theta[i], static_cast<std::size_t>(i));
  return out;
}

Eigen::VectorXd reparam_backward(const Reparam& reparam, const Eigen::VectorXd& theta_prime) {
  reparam.validate(static_cast<std::size_t>(theta_prime.size()));
  Eigen::VectorXd out(theta_prime.size());
  for (Eigen::Index i = 0; i < theta_prime.size(); ++i)
    out[i] = reparam.backward(theta_prime[i], static_cast<std::size_t>(i));
  return out;
}

Eigen::VectorXd ParamLayout::positive_values(const ParamVector& params) const {
  Eigen::VectorXd v(num_positive());
  v[0] = params.variance;
  v.segment(1, dim) = params.ranges;
  if (estimate_noise) v[dim + 1] = params.noise_variance;
  return v;
}

Eigen::VectorXd ParamLayout::pack(const ParamVector& params, const Reparam& reparam) const {
  if (params.dim() != dim) throw ContractViolation("ParamLayout::pack: dimension mismatch");
  Eigen::VectorXd x(size());
  x.head(num_positive()) = reparam_forward(reparam, positive_values(params));
  x[size() - 1] = params.mean;
  return x;
}

ParamVector ParamLayout::unpack(const Eigen::VectorXd& x, const Reparam& reparam,
                                double fixed_noise_variance) const {
  if (x.size() != size()) throw ContractViolation("ParamLayout::unpack: size mismatch");
  const Eigen::VectorXd positive = reparam_backward(reparam, x.head(num_positive()));
  ParamVector params;
  params.variance = positive[0];
  params.ranges = positive.segment(1, dim);
  params.noise_variance = estimate_noise ? positive[dim + 1] : fixed_noise_variance;
  params.mean = x[size() - 1];
  return params;
}

double nll(const KernelSpec& spec, const ParamVector& params, const Dataset& data,
           const JitterOptions& jitter) {
  check_inputs(spec, params, data);
  return factor_and_value(covariance_matrix(spec, params, data.X), params, data, jitter).value;
}

NllValueGrad nll_grad(const KernelSpec& spec, const ParamVector& params, const Dataset& data,
                      const Reparam& reparam, const LikelihoodOptions& options) {
  check_inputs(spec, params, data);
  const ParamLayout layout{spec.dim, options.estimate_noise};
  reparam.validate(static_cast<std::size_t>(layout.num_positive()));

  const int d = spec.dim;
  const Eigen::Index n = data.n();
  const Eigen::MatrixXd H = distance_matrix(data.X, params.ranges);
  const Eigen::MatrixXd R = correlation_from_distances(spec, H);
  Eigen::MatrixXd K = params.variance * R;
  K.diagonal().array() += params.noise_variance;

  // Same path as nll(): the value is bit-identical.
  Factorized f = factor_and_value(K, params, data, options.jitter);

  // dNLL/dtheta_j = 1/2 tr(W dK_j) with W = K^-1 - a a^T.
  Eigen::MatrixXd W = f.chol.inverse();
  W.noalias() -= f.alpha * f.alpha.transpose();

  Eigen::VectorXd grad_natural = Eigen::VectorXd::Zero(layout.size());
  grad_natural[0] = 0.5 * (W.array() * R.array()).sum();

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double weight = W(i, j) * correlation_dh2(spec, H(i, j));
      if (weight == 0.0) continue;
      for (int k = 0; k < d; ++k) {
        const double diff = data.X(i, k) - data.X(j, k);
        acc[k] += weight * diff * diff;
      }
    }
  }
  //   dK_il/drho_k = -2 sigma^2 g_il diff_k^2 / rho_k^3, counted twice by symmetry.
  for (int k = 0; k < d; ++k)
    grad_natural[1 + k] = -2.0 * params.variance * acc[k] / std::pow(params.ranges[k], 3);
  if (options.estimate_noise) grad_natural[d + 1] = 0.5 * W.trace();
  grad_natural[layout.size() - 1] = -f.alpha.sum();

  NllValueGrad out;
  out.value = f.value;
  out.grad_natural = grad_natural;
  out.grad = grad_natural;
  const Eigen::VectorXd positive = layout.positive_values(params);
  for (int i = 0; i < layout.num_positive(); ++i) {
    const double tp = reparam.forward(positive[i], static_cast<std::size_t>(i));
    out.grad[i] *= reparam.derivative(tp, static_cast<std::size_t>(i));
  }
  out.jitter_used = f.chol.jitter_used();
  return out;
}

ProfiledMeanVar profile_mean_var(const KernelSpec& spec,
                                 const Eigen::Ref<const Eigen::VectorXd>& ranges, double alpha,
                                 const Dataset& data, const JitterOptions& jitter) {
  spec.validate();
  data.validate();
  if (!(alpha >= 0.0)) throw ContractViolation("profile_mean_var: alpha must be non-negative");
  if (ranges.size() != spec.dim || data.dim() != spec.dim)
    throw ContractViolation("profile_mean_var: dimension mismatch");

  Eigen::MatrixXd Kt = correlation_matrix(spec, ranges, data.X);
  Kt.diagonal().array() += alpha;
  const JitteredCholesky chol = cholesky_with_jitter(Kt, 1.0, jitter);

  const Eigen::Index n = data.n();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd kinv_one = chol.solve(ones);
  const Eigen::VectorXd kinv_z = chol.solve(data.z);
  ProfiledMeanVar out;
  out.mean = kinv_z.sum() / kinv_one.sum();
  const Eigen::VectorXd residual = data.z.array() - out.mean;
  out.variance = residual.dot(chol.solve(residual)) / static_cast<double>(n);
  out.jitter_used = chol.jitter_used();

  const bool constant = (data.z.array() == data.z[0]).all();
  if (constant || !(out.variance > 0.0) || !std::isfinite(out.variance) ||
      !std::isfinite(out.mean)) {
    std::ostringstream os;
    os << "profile_mean_var: degenerate variance estimate " << out.variance;
    throw DegenerateProfile(os.str());
  }
  return out;
}

}  // namespace gpmle
