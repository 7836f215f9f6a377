#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

#include "gpmle/errors.hpp"
#include "gpmle/testbed.hpp"

using namespace gpmle;

TEST_CASE("Branin") {
  const double pi = std::numbers::pi;
  for (const Eigen::Vector2d x : {Eigen::Vector2d(-pi, 12.275), Eigen::Vector2d(pi, 2.275),
                                  Eigen::Vector2d(3 * pi, 2.475)})
    CHECK(branin(x) == doctest::Approx(0.397887).epsilon(1e-6));
  // By hand at the origin: (5.1/(4 pi^2) * 0 ... ) -> (6)^2 + 10 (1 - 1/(8 pi)) cos 0 + 10
  CHECK(branin(Eigen::Vector2d(0, 0)) == doctest::Approx(36.0 + 10.0 * (1.0 - 1.0 / (8.0 * pi)) + 10.0));
  const TestFunction& fn = get_function("branin");
  CHECK(fn.domain.lower == Eigen::Vector2d(-5, 0));
  CHECK(fn.domain.upper == Eigen::Vector2d(10, 15));
}

TEST_CASE("Borehole") {
  auto oracle = [](double rw, double r, double Tu, double Hu, double Tl, double Hl, double L, double Kw) {
    const double lr = std::log(r / rw);
    return 2.0 * std::numbers::pi * Tu * (Hu - Hl) / (lr * (1.0 + 2.0 * L * Tu / (lr * rw * rw * Kw) + Tu / Tl));
  };
  const TestFunction& fn = get_function("borehole");
  REQUIRE(fn.dim() == 8);
  for (const Eigen::VectorXd& u : {Eigen::VectorXd::Constant(8, 0.5), Eigen::VectorXd::Constant(8, 0.1)}) {
    const Eigen::VectorXd x = fn.domain.from_unit(u);
    CHECK(evaluate(fn, x) == doctest::Approx(oracle(x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7])));
  }
}

TEST_CASE("welded beam and g10") {
  const Eigen::Vector4d x(0.5, 3.0, 8.0, 0.6);
  CHECK(welded_beam(x) == doctest::Approx(1.10471 * 0.25 * 3.0 + 0.04811 * 8.0 * 0.6 * 17.0));
  const TestFunction& g = get_function("g10");
  CHECK(g.dim() == 8);
  Eigen::VectorXd y = g.domain.from_unit(Eigen::VectorXd::Constant(8, 0.5));
  CHECK(g10(y) == doctest::Approx(y[0] + y[1] + y[2]));
}

TEST_CASE("registry") {
  CHECK(function_names().size() == 6);
  CHECK(function_available("branin"));
  CHECK_FALSE(function_available("g10mod"));
  CHECK_THROWS_AS(get_function("g10mod"), NotAvailable);
  CHECK_THROWS_AS(get_function("g10modmod"), NotAvailable);
  CHECK_THROWS_AS(get_function("nope"), ContractViolation);
  CHECK_THROWS_AS(evaluate(get_function("branin"), Eigen::Vector2d(-6, 0)), OutOfDomain);
}

TEST_CASE("designs") {
  SUBCASE("Latin property and range") {
    for (auto kind : {DesignKind::LhsMdu, DesignKind::UniformRandom}) {
      DesignSpec s;
      s.kind = kind;
      s.n = 13;
      s.seed = 5;
      const Eigen::MatrixXd U = generate_unit_design(s, 3);
      CHECK(U.rows() == 13);
      CHECK(U.minCoeff() >= 0.0);
      CHECK(U.maxCoeff() <= 1.0);
      if (kind == DesignKind::LhsMdu) {
        for (int k = 0; k < 3; ++k) {
          std::set<int> bins;
          for (int i = 0; i < 13; ++i) bins.insert(static_cast<int>(std::floor(U(i, k) * 13)));
          CHECK(bins.size() == 13);
        }
      }
    }
  }
  SUBCASE("determinism") {
    DesignSpec s;
    s.n = 10;
    s.seed = 11;
    CHECK(generate_unit_design(s, 4) == generate_unit_design(s, 4));
    DesignSpec t = s;
    t.seed = 12;
    CHECK(generate_unit_design(s, 4) != generate_unit_design(t, 4));
  }
  SUBCASE("maximin selection never loses to the plain hypercube") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      DesignSpec s;
      s.n = 15;
      s.seed = seed;
      CHECK(min_pairwise_distance(generate_unit_design(s, 2)) >=
            min_pairwise_distance(random_lhs(15, 2, seed)));
    }
  }
  SUBCASE("mapping into the domain") {
    const TestFunction& fn = get_function("welded_beam");
    DesignSpec s;
    s.n = 30;
    const Eigen::MatrixXd X = generate_design(s, fn.domain);
    for (int i = 0; i < 30; ++i) CHECK(fn.domain.contains(X.row(i).transpose()));
  }
}

TEST_CASE("corpus") {
  CHECK(corpus_plan().size() == 24);
  const auto avail = available_corpus();
  CHECK(avail.size() == 16);
  for (const auto& e : avail) {
    const Dataset d = make_corpus_dataset(e);
    CHECK(d.n() == e.n);
    CHECK(d.n() == e.multiplier * d.dim());
    CHECK(d.z.allFinite());
  }
  CHECK(corpus_entry("borehole_5d").n == 40);
  CHECK_THROWS(corpus_entry("borehole_7d"));
  const Dataset a = make_corpus_dataset(corpus_entry("branin_10d"), 0);
  const Dataset b = make_corpus_dataset(corpus_entry("branin_10d"), 1);
  CHECK(a.X != b.X);
}

TEST_CASE("dataset CSV round-trip") {
  const Dataset d = make_corpus_dataset(corpus_entry("welded_beam_3d"));
  const auto path = (std::filesystem::temp_directory_path() / "gpmle_roundtrip.csv").string();
  write_dataset_csv(d, path);
  const Dataset r = read_dataset_csv(path);
  CHECK(r.X == d.X);
  CHECK(r.z == d.z);
  REQUIRE(r.meta.has_value());
  CHECK(r.meta->function == "welded_beam");
  CHECK(r.meta->seed == d.meta->seed);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_dataset_csv(path), IoError);
}
