#include <doctest.h>

#include <limits>

#include "gpmle/bench.hpp"
#include "gpmle/errors.hpp"

using namespace gpmle;
using nlohmann::json;

namespace {

ResultRow row(const std::string& scheme, const std::string& dataset, double nll, int rep = 0) {
  ResultRow r;
  r.scheme = scheme;
  r.dataset = dataset;
  r.repetition = rep;
  r.nll = nll;
  r.termination = Termination::Factr;
  r.params.variance = 1.5;
  r.params.ranges = Eigen::Vector2d(0.1, 1.0 / 3.0);
  r.params.mean = -2.0;
  r.n_runs = 1;
  return r;
}

std::vector<ResultRow> toy_rows(const std::vector<double>& diffs) {
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    const std::string ds = "d" + std::to_string(i);
    rows.push_back(row("ref", ds, 10.0));
    rows.push_back(row("s", ds, 10.0 + diffs[i]));
  }
  return rows;
}

}  // namespace

TEST_CASE("ECDF counting") {
  const EcdfReport rep = ecdf_of_differences(toy_rows({0.0, 0.0, 10.0}), "s", "ref");
  CHECK(rep(5.0) == doctest::Approx(2.0 / 3.0));
  CHECK(rep(-1.0) == 0.0);
  CHECK(rep(10.0) == 1.0);
  double prev = 0.0;
  for (double e = -1.0; e < 20.0; e += 0.25) {
    CHECK(rep(e) >= prev);
    prev = rep(e);
  }
  const EcdfReport neg = ecdf_of_differences(toy_rows({-1e-3, -1e-9, 2.0}), "s", "ref");
  CHECK(neg.negative == 1);
}

TEST_CASE("area under the ECDF") {
  CHECK(area_under_ecdf(ecdf_of_differences(toy_rows({0, 0, 0}), "s", "ref"), 100) == doctest::Approx(100));
  CHECK(area_under_ecdf(ecdf_of_differences(toy_rows({100, 200}), "s", "ref"), 100) == doctest::Approx(0));
  CHECK(area_under_ecdf(ecdf_of_differences(toy_rows({50, 50}), "s", "ref"), 100) == doctest::Approx(50));

  auto rows = toy_rows({1, 2});
  rows.push_back(row("s", "d2", 0.0));
  rows.back().error = "failed";
  rows.push_back(row("ref", "d2", 1.0));
  const EcdfReport with_failure = ecdf_of_differences(rows, "s", "ref");
  CHECK(with_failure.failed == 1);
  CHECK(std::isinf(with_failure.diffs.back()));
  CHECK(area_under_ecdf(with_failure, 100) == doctest::Approx(100.0 * (99 + 98) / 300.0));

  const EcdfReport self = ecdf_of_differences(toy_rows({4, 5}), "ref", "ref");
  CHECK(area_under_ecdf(self) == doctest::Approx(100));

  // pointwise dominance orders the areas
  const double a = area_under_ecdf(ecdf_of_differences(toy_rows({0.5, 3, 40}), "s", "ref"));
  const double b = area_under_ecdf(ecdf_of_differences(toy_rows({1.5, 3, 90}), "s", "ref"));
  CHECK(a >= b);
}

TEST_CASE("ECDF aggregation and errors") {
  std::vector<ResultRow> rows = {row("ref", "d0", 1.0), row("s", "d0", 2.0, 0), row("s", "d0", 4.0, 1)};
  CHECK(ecdf_of_differences(rows, "s", "ref", Aggregate::Pooled).diffs.size() == 2);
  const EcdfReport mean = ecdf_of_differences(rows, "s", "ref", Aggregate::Mean);
  REQUIRE(mean.diffs.size() == 1);
  CHECK(mean.diffs[0] == doctest::Approx(2.0));
  rows.push_back(row("s", "d1", 1.0));
  CHECK_THROWS_AS(ecdf_of_differences(rows, "s", "ref"), MissingReference);
  CHECK_THROWS_AS(ecdf_of_differences(rows, "nope", "ref"), ContractViolation);
}

TEST_CASE("CSV serialization") {
  std::vector<ResultRow> rows = {row("ref", "d0", 0.1 + 0.2), row("s", "d0", -1e-300, 2)};
  rows[1].error = "fit failed, all runs";
  rows[1].termination.reset();
  const std::string text = results_csv(rows);
  CHECK(text == results_csv(rows));
  const auto parsed = parse_results_csv(text);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].nll == rows[0].nll);
  CHECK(parsed[0].params.ranges == rows[0].params.ranges);
  CHECK(parsed[0].termination == Termination::Factr);
  CHECK(parsed[1].failed());
  CHECK(results_csv(parsed) == text);

  const std::string empty = results_csv({});
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);
  CHECK(parse_results_csv(empty).empty());

  rows[0].wall_time = 0.25;
  auto copy = parsed;
  merge_timings(copy, timings_csv(rows));
  CHECK(copy[0].wall_time == 0.25);
}

TEST_CASE("configuration") {
  const json good = {{"schemes", {{{"preset", "improved"}}, {{"id", "ms"}, {"preset", "improved"},
                                                             {"restart", {{"kind", "multistart"}, {"n_opt", 3}}}}}},
                     {"reference", {{"preset", "reference"}, {"restart", {{"kind", "multistart"}, {"n_opt", 5}}}}},
                     {"datasets", {"branin_3d"}},
                     {"repetitions", 2}};
  const ExperimentMatrix m = matrix_from_json(good);
  CHECK(m.schemes.size() == 2);
  CHECK(std::get<MultiStart>(m.schemes[1].restart).n_opt == 3);
  CHECK(matrix_to_json(matrix_from_json(matrix_to_json(m))) == matrix_to_json(m));

  json bad = good;
  bad["typo"] = 1;
  CHECK_THROWS_AS(matrix_from_json(bad), ConfigError);
  bad = good;
  bad["schemes"][0]["stoping"] = "soft";
  CHECK_THROWS_AS(matrix_from_json(bad), ConfigError);
  bad = good;
  bad["reference"]["restart"]["n_opt"] = 4;
  CHECK_THROWS_AS(matrix_from_json(bad), ConfigError);
  bad = good;
  bad["datasets"] = json::array({"mystery_3d"});
  CHECK_THROWS_AS(matrix_from_json(bad), ConfigError);
  bad = good;
  bad["schemes"][1]["id"] = "improved";
  CHECK_THROWS_AS(matrix_from_json(bad), ConfigError);
  bad = good;
  bad["repetitions"] = 0;
  CHECK_THROWS_AS(matrix_from_json(bad), ConfigError);

  const SchemeConfig s = scheme_from_json(scheme_to_json(SchemeConfig::default_preset()));
  CHECK(s.reparam == ReparamChoice::InvSoftplus);
  CHECK(std::holds_alternative<ConstantInit>(s.init));
}

TEST_CASE("matrix bookkeeping") {
  ExperimentMatrix m;
  m.schemes = {SchemeConfig::improved()};
  m.reference = SchemeConfig::reference(5);
  m.datasets = {"branin_3d"};
  m.repetitions = 1;
  const auto rows = run_matrix(m);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].scheme == "reference");
  CHECK(rows[1].scheme == "improved");
  CHECK_FALSE(any_failed(rows));
  CHECK(scheme_ids(rows) == std::vector<std::string>{"reference", "improved"});

  m.repetitions = 3;
  m.schemes.push_back(SchemeConfig::reference(2));
  m.schemes.back().id = "ms2";
  m.datasets = {"branin_3d", "g10mod_3d"};
  const auto more = run_matrix(m, 2);
  CHECK(more.size() == 1 + 1 + 3);
  CHECK(results_csv(more) == results_csv(run_matrix(m, 1)));
  CHECK(unavailable_datasets(m.datasets) == std::vector<std::string>{"g10mod_3d"});

  // the same scheme under two ids gives the same numbers
  ExperimentMatrix twice;
  twice.schemes = {SchemeConfig::reference(3), SchemeConfig::reference(3)};
  twice.schemes[0].id = "first";
  twice.schemes[1].id = "second";
  twice.datasets = {"welded_beam_3d"};
  twice.repetitions = 2;
  const auto tw = run_matrix(twice);
  REQUIRE(tw.size() == 5);
  for (int r = 0; r < 2; ++r) {
    CHECK(tw[1 + r].nll == tw[3 + r].nll);
    CHECK(tw[1 + r].params.ranges == tw[3 + r].params.ranges);
  }
}

TEST_CASE("jitter study") {
  const JitterScenario sc = make_jitter_scenario("branin", 20, 0, SchemeConfig::default_preset());
  const auto rows = jitter_study(sc, {0.0, 1e-8, 1e-6, 1e-4, 1e-2});
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].kappa < rows[i - 1].kappa);
  for (const auto& r : rows) {
    CHECK(r.kappa_logdet > 0.0);
    CHECK(std::isfinite(r.delta_quad));
    CHECK(std::isfinite(r.nll));
  }
  CHECK(jitter_csv(rows) == jitter_csv(jitter_study(sc, {0.0, 1e-8, 1e-6, 1e-4, 1e-2})));
}
