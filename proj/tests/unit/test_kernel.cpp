#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <random>

#include "gpmle/errors.hpp"
#include "gpmle/kernel.hpp"
#include "oracles.hpp"

using namespace gpmle;

namespace {

// Matern correlation via Boost's K_nu in long double.
long double matern_boost(long double nu, long double h) {
  if (h == 0.0L) return 1.0L;
  const long double z = std::sqrt(2.0L * nu) * h;
  return std::pow(2.0L, 1.0L - nu) / boost::math::tgamma(nu) * std::pow(z, nu) *
         boost::math::cyl_bessel_k(nu, z);
}

ParamVector params(double variance, Eigen::VectorXd ranges, double noise = 0.0) {
  ParamVector p;
  p.variance = variance;
  p.ranges = std::move(ranges);
  p.noise_variance = noise;
  return p;
}

}  // namespace

TEST_CASE("scaled distance") {
  Eigen::Vector2d x(1, 0), y(0, 0), rho(2, 1);
  CHECK(scaled_distance(x, y, rho) == doctest::Approx(0.5));
  CHECK(scaled_distance(x, x, rho) == 0.0);
  CHECK_THROWS_AS(scaled_distance(Eigen::Vector3d(1, 2, 3), y, rho), ContractViolation);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd a(5), b(5), r(5);
    for (int k = 0; k < 5; ++k) {
      a[k] = u(rng);
      b[k] = u(rng);
      r[k] = u(rng);
    }
    double s = 0.0;
    for (int k = 0; k < 5; ++k) s += (a[k] - b[k]) * (a[k] - b[k]) / (r[k] * r[k]);
    CHECK(oracle::rel_err(scaled_distance(a, b, r), std::sqrt(s)) < 1e-15);
    CHECK(scaled_distance(a, b, r) == scaled_distance(b, a, r));
    CHECK(scaled_distance(a, b, r) > 0.0);
  }
}

TEST_CASE("correlation values") {
  for (const KernelSpec& s : {KernelSpec::squared_exponential(1), KernelSpec::rational_quadratic(1),
                              KernelSpec::matern(1), KernelSpec::matern(1, 0.5),
                              KernelSpec::matern(1, 1.5), KernelSpec::matern(1, 0.8)})
    CHECK(correlation(s, 0.0) == 1.0);
  CHECK(correlation(KernelSpec::squared_exponential(1), 1.0) == doctest::Approx(0.6065306597126334));
  CHECK(correlation(KernelSpec::rational_quadratic(1), 1.0) == doctest::Approx(0.5));
  CHECK(correlation(KernelSpec::rational_quadratic(1, 2.0), 1.0) == doctest::Approx(0.25));
}

TEST_CASE("Matern closed form agrees with the Bessel expression") {
  for (double nu : {0.5, 1.5, 2.5}) {
    const KernelSpec s = KernelSpec::matern(1, nu);
    for (double logh = -8.0; logh <= std::log10(20.0); logh += 0.05) {
      const double h = std::pow(10.0, logh);
      const double ref = static_cast<double>(matern_boost(nu, h));
      CHECK(oracle::rel_err(correlation(s, h), ref) < 1e-10);
    }
  }
  CHECK(oracle::rel_err(correlation(KernelSpec::matern(1), 1.0),
                        static_cast<double>(matern_boost(2.5L, 1.0L))) < 1e-10);
}

TEST_CASE("general-nu Matern path") {
  for (double nu : {0.3, 0.8, 1.2, 2.5, 3.7}) {
    for (double h : {1e-6, 1e-3, 0.1, 0.7, 2.0, 9.0}) {
      const double ref = static_cast<double>(matern_boost(nu, h));
      CHECK(oracle::rel_err(matern_bessel(nu, h), ref) < 1e-9);
    }
    CHECK(matern_bessel(nu, 0.0) == 1.0);
  }
}

TEST_CASE("correlation is non-increasing") {
  for (const KernelSpec& s : {KernelSpec::squared_exponential(1), KernelSpec::rational_quadratic(1),
                              KernelSpec::matern(1), KernelSpec::matern(1, 0.7)}) {
    double prev = 1.0;
    for (double h = 0.0; h < 30.0; h += 0.01) {
      const double r = correlation(s, h);
      CHECK(r <= prev);
      CHECK(r >= 0.0);
      prev = r;
    }
  }
}

TEST_CASE("correlation_dh2 matches finite differences in h^2") {
  for (const KernelSpec& s : {KernelSpec::squared_exponential(1), KernelSpec::rational_quadratic(1, 1.7),
                              KernelSpec::matern(1), KernelSpec::matern(1, 1.5), KernelSpec::matern(1, 0.5),
                              KernelSpec::matern(1, 3.2)}) {
    for (double h : {0.05, 0.4, 1.0, 2.5}) {
      const double t = h * h, eps = 1e-6 * t;
      const double fd = (correlation(s, std::sqrt(t + eps)) - correlation(s, std::sqrt(t - eps))) / (2 * eps);
      CHECK(oracle::rel_err(correlation_dh2(s, h), fd) < 1e-6);
    }
  }
  // limit at the origin
  CHECK(correlation_dh2(KernelSpec::matern(1), 0.0) == doctest::Approx(-5.0 / 6.0));
  CHECK(correlation_dh2(KernelSpec::matern(1, 3.2), 0.0) == doctest::Approx(-3.2 / (2 * 2.2)));
  CHECK(correlation_dh2(KernelSpec::matern(1, 0.5), 0.0) == 0.0);
}

TEST_CASE("kernel spec validation") {
  CHECK_THROWS_AS(KernelSpec::matern(1, 0.0).validate(), ContractViolation);
  CHECK_THROWS_AS(KernelSpec::rational_quadratic(1, -1.0).validate(), ContractViolation);
  CHECK_THROWS_AS(KernelSpec::squared_exponential(0).validate(), ContractViolation);
  CHECK_NOTHROW(KernelSpec::squared_exponential(2).validate());
  CHECK_THROWS_AS(params(-1.0, Eigen::VectorXd::Ones(2)).validate(KernelSpec::matern(2)), ContractViolation);
  CHECK_THROWS_AS(params(1.0, Eigen::VectorXd::Ones(3)).validate(KernelSpec::matern(2)), ContractViolation);
  CHECK_THROWS_AS(params(1.0, Eigen::VectorXd::Ones(2), -1e-3).validate(KernelSpec::matern(2)),
                  ContractViolation);
}

TEST_CASE("covariance matrix") {
  const KernelSpec spec = KernelSpec::matern(2);
  Eigen::MatrixXd X1(1, 2);
  X1 << 0.3, 0.4;
  const Eigen::MatrixXd K1 = covariance_matrix(spec, params(2.0, Eigen::Vector2d(1, 1), 0.5), X1);
  CHECK(K1.rows() == 1);
  CHECK(K1(0, 0) == doctest::Approx(2.5));

  Eigen::MatrixXd X2(2, 2);
  X2 << 1, 1, 1, 1;
  const Eigen::MatrixXd K2 = covariance_matrix(spec, params(3.0, Eigen::Vector2d(1, 2)), X2);
  CHECK((K2.array() == 3.0).all());

  std::mt19937_64 rng(11);
  for (int fam = 0; fam < 3; ++fam) {
    auto prob = oracle::random_problem(rng, 6, 3, oracle::kernel_for(fam, 3), 0.1);
    const Eigen::MatrixXd K = covariance_matrix(prob.spec, prob.params, prob.data.X);
    const Eigen::MatrixXd ref = oracle::covariance(prob.spec, prob.params, prob.data.X);
    CHECK((K - ref).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 6; ++i) CHECK(K(i, i) == doctest::Approx(prob.params.variance + 0.1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K - 0.1 * Eigen::MatrixXd::Identity(6, 6));
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * prob.params.variance);
  }
}

TEST_CASE("scaling inputs and ranges together leaves K unchanged") {
  std::mt19937_64 rng(5);
  auto prob = oracle::random_problem(rng, 7, 2, KernelSpec::matern(2));
  const Eigen::MatrixXd K = covariance_matrix(prob.spec, prob.params, prob.data.X);
  ParamVector scaled = prob.params;
  scaled.ranges *= 8.0;
  const Eigen::MatrixXd K8 = covariance_matrix(prob.spec, scaled, 8.0 * prob.data.X);
  CHECK((K - K8).cwiseAbs().maxCoeff() < 1e-14 * prob.params.variance);
}

TEST_CASE("cross covariance") {
  std::mt19937_64 rng(7);
  auto prob = oracle::random_problem(rng, 5, 2, KernelSpec::matern(2), 0.3);
  const Eigen::VectorXd x = prob.data.X.row(2).transpose();
  const Eigen::VectorXd k = cross_covariance(prob.spec, prob.params, prob.data.X, x);
  CHECK(k[2] == doctest::Approx(prob.params.variance));
  for (int i = 0; i < 5; ++i) {
    double h2 = 0.0;
    for (int c = 0; c < 2; ++c) h2 += std::pow((prob.data.X(i, c) - x[c]) / prob.params.ranges[c], 2);
    CHECK(oracle::rel_err(k[i], prob.params.variance * oracle::corr(prob.spec, std::sqrt(h2))) < 1e-12);
  }
  double prev = prob.params.variance;
  for (double t = 2.0; t < 200.0; t *= 1.5) {
    const Eigen::VectorXd far = cross_covariance(prob.spec, prob.params, prob.data.X, Eigen::Vector2d(t, t));
    CHECK(far.maxCoeff() <= prev);
    prev = far.maxCoeff();
  }
  CHECK(prev < 1e-12);
}

TEST_CASE("covariance gradient") {
  SUBCASE("noise derivative is the identity") {
    std::mt19937_64 rng(1);
    auto prob = oracle::random_problem(rng, 4, 2, KernelSpec::squared_exponential(2));
    const auto g = covariance_gradient(prob.spec, prob.params, prob.data.X);
    REQUIRE(g.size() == 4);
    CHECK((g.back() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((g.front() - correlation_matrix(prob.spec, prob.params.ranges, prob.data.X)).cwiseAbs().maxCoeff() ==
          0.0);
  }
  SUBCASE("finite differences on a Branin-domain design") {
    Eigen::MatrixXd X(6, 2);
    X << -4.0, 1.0, -1.5, 12.0, 0.5, 6.0, 3.0, 3.5, 6.5, 9.0, 9.0, 14.0;
    for (int fam = 0; fam < 3; ++fam) {
      const KernelSpec spec = oracle::kernel_for(fam, 2);
      const ParamVector p = params(30.0, Eigen::Vector2d(4.0, 7.0), 0.2);
      const auto g = covariance_gradient(spec, p, X);
      auto perturbed = [&](int j, double delta) {
        ParamVector q = p;
        if (j == 0) q.variance += delta;
        else if (j <= 2) q.ranges[j - 1] += delta;
        else q.noise_variance += delta;
        return covariance_matrix(spec, q, X);
      };
      const double values[] = {p.variance, p.ranges[0], p.ranges[1], p.noise_variance};
      for (int j = 0; j < 4; ++j) {
        const double step = 1e-6 * values[j];
        const Eigen::MatrixXd fd = (perturbed(j, step) - perturbed(j, -step)) / (2 * step);
        CHECK((g[j] - fd).norm() / fd.norm() < 1e-6);
        CHECK((g[j] - g[j].transpose()).cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }
  SUBCASE("squared exponential hand formula") {
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 1.3;
    const double rho = 0.8, s2 = 2.0;
    const auto g = covariance_gradient(KernelSpec::squared_exponential(1), params(s2, Eigen::VectorXd::Constant(1, rho)), X);
    const double h = 1.3 / rho;
    CHECK(oracle::rel_err(g[1](0, 1), s2 * std::exp(-h * h / 2) * h * h / rho) < 1e-14);
    CHECK(g[1](0, 0) == 0.0);
  }
}
