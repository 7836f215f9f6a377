#include <doctest.h>

#include <random>

#include "gpmle/errors.hpp"
#include "gpmle/linalg.hpp"
#include "oracles.hpp"

using namespace gpmle;

TEST_CASE("jitter ladder") {
  SUBCASE("well conditioned") {
    const auto c = cholesky_with_jitter(Eigen::MatrixXd::Identity(3, 3), 1.0);
    CHECK(c.jitter_used() == 1e-8);
    CHECK(c.attempts() == 1);
  }
  SUBCASE("exactly singular") {
    const double s2 = 7.0;
    const Eigen::MatrixXd K = Eigen::MatrixXd::Constant(2, 2, s2);
    JitterOptions opt;
    opt.min_jitter = 0.0;
    const auto c = cholesky_with_jitter(K, s2, opt);
    CHECK(c.jitter_used() == doctest::Approx(1e-6 * s2));
    const Eigen::MatrixXd L = c.matrix_l();
    const Eigen::MatrixXd target = K + c.jitter_used() * Eigen::MatrixXd::Identity(2, 2);
    CHECK((L * L.transpose() - target).cwiseAbs().maxCoeff() < 1e-12 * s2);
  }
  SUBCASE("negative eigenvalue that no level repairs") {
    Eigen::MatrixXd K = Eigen::MatrixXd::Identity(3, 3);
    K(2, 2) = -1.0;
    CHECK_THROWS_AS(cholesky_with_jitter(K, 1.0, JitterOptions::short_ladder()), AllJitterFailed);
    // the long ladder reaches 10 * sigma^2 and succeeds
    CHECK(cholesky_with_jitter(K, 1.0).jitter_used() == doctest::Approx(10.0));
  }
  SUBCASE("reconstruction property") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
      const Eigen::MatrixXd K = oracle::random_spd(rng, 10, 6.0);
      const auto c = cholesky_with_jitter(K, 1.0);
      const Eigen::MatrixXd L = c.matrix_l();
      const Eigen::MatrixXd target = K + c.jitter_used() * Eigen::MatrixXd::Identity(10, 10);
      CHECK((L * L.transpose() - target).norm() <= 1e-12 * K.norm());
    }
  }
  SUBCASE("invalid ladder") {
    JitterOptions opt;
    opt.ladder = {1e-3, 1e-4};
    CHECK_THROWS_AS(cholesky_with_jitter(Eigen::MatrixXd::Identity(2, 2), 1.0, opt), ContractViolation);
  }
}

TEST_CASE("solve") {
  const JitterOptions exact = JitterOptions::fixed(0.0);
  const Eigen::Vector3d b(1, -2, 5);
  CHECK((solve(cholesky_with_jitter(Eigen::MatrixXd::Identity(3, 3), 1.0, exact), b) - b).norm() == 0.0);

  Eigen::Matrix2d A;
  A << 4, 1, 1, 3;
  const Eigen::Vector2d rhs(1, 2);
  // [[4,1],[1,3]]^-1 = 1/11 [[3,-1],[-1,4]]
  const Eigen::Vector2d expected((3 * 1 - 1 * 2) / 11.0, (-1 * 1 + 4 * 2) / 11.0);
  CHECK((solve(cholesky_with_jitter(A, 1.0, exact), rhs) - expected).norm() < 1e-15);

  std::mt19937_64 rng(4);
  const Eigen::MatrixXd K = oracle::random_spd(rng, 8, 2.0);
  const auto c = cholesky_with_jitter(K, 1.0, exact);
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(8, -1, 1);
  const Eigen::VectorXd ref = K.fullPivLu().inverse() * v;
  CHECK((solve(c, v) - ref).norm() / ref.norm() < 1e-10);
  const Eigen::MatrixXd B = Eigen::MatrixXd::Random(8, 3);
  CHECK((solve_matrix(c, B) - K.fullPivLu().inverse() * B).norm() < 1e-10 * B.norm() * 1e4);
  CHECK_THROWS_AS(solve(c, Eigen::VectorXd::Ones(3)), ContractViolation);
  const double kappa = conditioning_report(K).kappa;
  CHECK((K * solve(c, v) - v).norm() / v.norm() <= 1e-8 * kappa);
}

TEST_CASE("log determinant") {
  const JitterOptions exact = JitterOptions::fixed(0.0);
  CHECK(log_det(cholesky_with_jitter(Eigen::MatrixXd::Identity(4, 4), 1.0, exact)) == 0.0);
  CHECK(log_det(cholesky_with_jitter(Eigen::MatrixXd::Constant(1, 1, 4.0), 1.0, exact)) ==
        doctest::Approx(std::log(4.0)));
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd K = oracle::random_spd(rng, 6, 3.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    const double ref = eig.eigenvalues().array().log().sum();
    const double ld = log_det(cholesky_with_jitter(K, 1.0, exact));
    CHECK(oracle::rel_err(ld, ref) < 1e-10);
    CHECK(oracle::rel_err(ld, conditioning_report(K).sum_log_eigenvalues) < 1e-10);
  }
}

TEST_CASE("conditioning report") {
  const Eigen::MatrixXd eI = std::exp(1.0) * Eigen::MatrixXd::Identity(2, 2);
  const auto r = conditioning_report(eI);
  CHECK(r.kappa == doctest::Approx(1.0));
  CHECK(r.kappa_logdet == doctest::Approx(1.0));
  CHECK_THROWS_AS(conditioning_report(Eigen::MatrixXd::Identity(3, 3)), DegenerateLogDet);
  const double a = 3.0;
  CHECK_THROWS_AS(conditioning_report(Eigen::Vector2d(a, 1 / a).asDiagonal().toDenseMatrix()), DegenerateLogDet);
  const auto finite = conditioning_report(Eigen::Vector2d(a * a, a).asDiagonal().toDenseMatrix());
  CHECK(std::isfinite(finite.kappa_logdet));
  CHECK(finite.kappa == doctest::Approx(a));
  Eigen::Matrix2d indefinite;
  indefinite << 1, 2, 2, 1;
  CHECK_THROWS_AS(conditioning_report(indefinite), ContractViolation);

  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 29;
    const auto rep = conditioning_report(oracle::random_spd(rng, n, 5.0));
    CHECK(rep.lower_bound <= rep.kappa_logdet);
    CHECK(rep.kappa_logdet <= rep.upper_bound);
    for (Eigen::Index i = 1; i < rep.eigenvalues.size(); ++i)
      CHECK(rep.eigenvalues[i] <= rep.eigenvalues[i - 1]);
  }
}

TEST_CASE("numerical noise measurement") {
  auto quad = [](double t) { return 1.0 + 3.0 * t + 2.0 * t * t; };
  CHECK(measure_numerical_noise(quad, 0.0, 1e-5).delta < 1e-14);
  CHECK(measure_numerical_noise(quad, 0.5, 0.25, 50, NoiseQuantity::LogDet).quantity == NoiseQuantity::LogDet);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> noise(-1e-7, 1e-7);
  std::vector<double> samples(100);
  for (double& s : samples) s = noise(rng);
  int call = 0;
  auto noisy = [&](double t) { return 1.0 + t + t * t + samples[call++ % 100]; };
  const double delta = measure_numerical_noise(noisy, 0.0, 1e-3).delta;
  // uniform(+-a) has standard deviation a / sqrt(3)
  CHECK(delta >= 1e-8);
  CHECK(delta <= 1e-7);

  CHECK_THROWS_AS(measure_numerical_noise(quad, 0.0, 1e-5, 5), ContractViolation);
  CHECK_THROWS_AS(measure_numerical_noise([](double) { return NAN; }, 0.0, 1e-5), EvaluationError);
}
