#include "gpmle/predict.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "detail/parallel.hpp"
#include "gpmle/errors.hpp"

namespace gpmle {

namespace {

JitteredCholesky factor(const KernelSpec& spec, const ParamVector& params, const Dataset& data,
                        const JitterOptions& jitter) {
  spec.validate();
  params.validate(spec);
  data.validate();
  if (data.dim() != spec.dim) throw ContractViolation("FittedGP: data dimension mismatch");
  return cholesky_with_jitter(covariance_matrix(spec, params, data.X), params.variance, jitter);
}

void check_point(const FittedGP& model, Eigen::Index size) {
  if (size != model.spec().dim) throw ContractViolation("predict: point dimension mismatch");
}

std::uint64_t fold_seed(std::uint64_t seed, int fold) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x6c6f6fu, static_cast<std::uint32_t>(fold)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

FittedGP::FittedGP(KernelSpec spec, ParamVector params, Dataset data, const JitterOptions& jitter)
    : spec_(std::move(spec)), params_(std::move(params)), data_(std::move(data)),
      chol_(factor(spec_, params_, data_, jitter)),
      clamped_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
  alpha_ = chol_.solve(data_.z.array() - params_.mean);
}

double posterior_mean(const FittedGP& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_point(model, x.size());
  return model.params().mean +
         cross_covariance(model.spec(), model.params(), model.data().X, x).dot(model.alpha());
}

Eigen::VectorXd posterior_mean_at(const FittedGP& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.spec().dim) throw ContractViolation("predict: point dimension mismatch");
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = posterior_mean(model, X.row(i).transpose());
  return out;
}

double posterior_covariance(const FittedGP& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& y) {
  check_point(model, x.size());
  check_point(model, y.size());
  const ParamVector& p = model.params();
  const Eigen::VectorXd kx = cross_covariance(model.spec(), p, model.data().X, x);
  const bool same = (x.array() == y.array()).all();
  const Eigen::VectorXd ky = same ? kx : cross_covariance(model.spec(), p, model.data().X, y);
  const double prior = p.variance * correlation(model.spec(), scaled_distance(x, y, p.ranges));
  // Solve against the smaller of the two projections so that the result is
  // symmetric in (x, y): L^-1 kx . L^-1 ky.
  const auto L = model.chol().llt().matrixL();
  const Eigen::VectorXd vx = L.solve(kx);
  const Eigen::VectorXd vy = same ? vx : Eigen::VectorXd(L.solve(ky));
  double value = prior - vx.dot(vy);
  if (same && value < 0.0) {
    model.clamped_->fetch_add(1);
    value = 0.0;
  }
  return value;
}

double posterior_variance(const FittedGP& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return posterior_covariance(model, x, x);
}

double ermspe(const FittedGP& model, const Eigen::MatrixXd& test_X, const Eigen::VectorXd& test_z) {
  if (test_X.rows() < 1 || test_X.rows() != test_z.size())
    throw ContractViolation("ermspe: need m >= 1 test points with matching observations");
  const Eigen::VectorXd pred = posterior_mean_at(model, test_X);
  return std::sqrt((test_z - pred).squaredNorm() / static_cast<double>(test_z.size()));
}

double normalized_interp_error(const FittedGP& model) {
  const Dataset& data = model.data();
  if (data.n() < 2) throw ContractViolation("normalized_interp_error: need n >= 2");
  const double sd = std::sqrt((data.z.array() - data.z.mean()).square().mean());
  if (!(sd > 0.0)) throw ConstantData("normalized_interp_error: observations are constant");
  const Eigen::VectorXd pred = posterior_mean_at(model, data.X);
  return std::sqrt((data.z - pred).squaredNorm() / static_cast<double>(data.n())) / sd;
}

std::vector<LooRecord> loo_refit(const SchemeConfig& scheme, const KernelSpec& spec,
                                 const Dataset& data, int jobs) {
  data.validate();
  const int n = data.n();
  if (n < 3) throw ContractViolation("loo_refit: need n >= 3");
  std::vector<LooRecord> records(static_cast<std::size_t>(n));
  detail::parallel_for(records.size(), jobs, [&](std::size_t fold) {
    const int i = static_cast<int>(fold);
    LooRecord& rec = records[fold];
    rec.index = i;
    Dataset train;
    train.X.resize(n - 1, data.dim());
    train.z.resize(n - 1);
    for (int r = 0, k = 0; r < n; ++r) {
      if (r == i) continue;
      train.X.row(k) = data.X.row(r);
      train.z[k++] = data.z[r];
    }
    SchemeConfig fold_scheme = scheme;
    fold_scheme.seed = fold_seed(scheme.seed, i);
    try {
      const FitResult fr = fit(fold_scheme, spec, train);
      rec.nll = fr.nll;
      rec.params = fr.params;
      const FittedGP model(spec, fr.params, std::move(train), fold_scheme.jitter);
      const double err = data.z[i] - posterior_mean(model, data.X.row(i).transpose());
      rec.sq_error = err * err;
    } catch (const Error& e) {
      rec.error = e.what();
      rec.nll = std::numeric_limits<double>::quiet_NaN();
      rec.sq_error = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return records;
}

double loo_mse(const std::vector<LooRecord>& records) {
  double sum = 0.0;
  int count = 0;
  for (const LooRecord& r : records) {
    if (r.failed()) continue;
    sum += r.sq_error;
    ++count;
  }
  return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace gpmle
