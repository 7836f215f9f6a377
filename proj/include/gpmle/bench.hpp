#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpmle/kernel.hpp"
#include "gpmle/linalg.hpp"
#include "gpmle/mle.hpp"
#include "gpmle/predict.hpp"
#include "gpmle/testbed.hpp"

namespace gpmle {

// ---- experiment matrix ----

struct ExperimentMatrix {
  std::vector<SchemeConfig> schemes;
  SchemeConfig reference = SchemeConfig::reference();
  std::vector<std::string> datasets;  // corpus ids
  int repetitions = 1;                // for stochastic schemes
  std::uint64_t master_seed = 0;
  std::uint64_t data_seed = 0;
  KernelFamily family = KernelFamily::Matern;
  double nu = 2.5;

  /// Throws ConfigError for a reference whose multi-start budget is not the
  /// largest, an empty dataset list or non-positive repetitions.
  void validate() const;
  KernelSpec kernel(int dim) const;
};

/// Every dataset id of the plan that cannot be generated yet.
std::vector<std::string> unavailable_datasets(const std::vector<std::string>& ids);

struct ResultRow {
  std::string scheme;
  std::string dataset;
  int repetition = 0;
  double nll = 0.0;
  double wall_time = 0.0;
  std::optional<Termination> termination;
  ParamVector params;
  int best_run = 0;
  int n_runs = 0;
  int n_evals = 0;
  std::string error;  // non-empty for a failed cell

  bool failed() const { return !error.empty(); }
};

/// Seed of the cell (scheme seed, dataset, repetition). It does not depend on
/// the scheme id, so MultiStart budgets share their first runs.
std::uint64_t cell_seed(std::uint64_t master_seed, std::uint64_t scheme_seed,
                        const std::string& dataset, int repetition);

/// Runs the reference once per dataset and every other scheme once, or
/// `repetitions` times when stochastic. Rows come back ordered by cell key
/// (reference first, then schemes in order; datasets in order; repetition).
/// Unavailable datasets are skipped.
std::vector<ResultRow> run_matrix(const ExperimentMatrix& m, int jobs = 1);

bool any_failed(const std::vector<ResultRow>& rows);

// ---- ECDF of NLL differences ----

enum class Aggregate { Pooled, Mean };

struct EcdfReport {
  std::string scheme;
  std::vector<double> diffs;  // sorted ascending; failed cells are +inf
  int negative = 0;           // diffs below -1e-6
  int failed = 0;

  /// Fraction of diffs <= e.
  double operator()(double e) const;
};

/// e = NLL(scheme) - NLL(reference) per dataset and repetition. Repetitions
/// are pooled, or averaged per dataset with Aggregate::Mean. Throws
/// MissingReference when a dataset has no successful reference row.
EcdfReport ecdf_of_differences(const std::vector<ResultRow>& rows, const std::string& scheme,
                               const std::string& reference, Aggregate aggregate = Aggregate::Pooled);

/// Integral of the ECDF over [0, nll_max], scaled to [0, 100].
double area_under_ecdf(const EcdfReport& report, double nll_max = 100.0);

/// Scheme ids in order of first appearance.
std::vector<std::string> scheme_ids(const std::vector<ResultRow>& rows);

// ---- jitter study ----

struct JitterScenario {
  KernelSpec spec;
  ParamVector params;
  Dataset data;
};

/// Fits `scheme` on an n-point LhsMdu design of `function` with no
/// observation noise.
JitterScenario make_jitter_scenario(const std::string& function, int n, std::uint64_t seed,
                                    const SchemeConfig& scheme);

struct JitterStudyOptions {
  double half_width = 1e-5;
  int num_points = 100;
  JitterOptions jitter;
};

struct JitterRow {
  double ratio = 0.0;
  double kappa = 0.0;
  double kappa_logdet = 0.0;
  double delta_quad = 0.0;
  double delta_logdet = 0.0;
  double nll = 0.0;
  double interp_error = 0.0;
  double jitter_used = 0.0;
};

/// For each ratio, sets sigma_eps^2 = ratio * sigma^2 at the scenario's other
/// parameters and measures the conditioning of K (jitter included), the
/// numerical noise of the quadratic form and of log|K| along a transect in
/// (log sigma^2, log rho), the NLL and the training interpolation error.
std::vector<JitterRow> jitter_study(const JitterScenario& scenario,
                                    const std::vector<double>& ratios,
                                    const JitterStudyOptions& options = {});

// ---- serialization ----

std::string results_csv(const std::vector<ResultRow>& rows);
std::string timings_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(const std::string& text);
/// Fills wall_time from a timings table.
void merge_timings(std::vector<ResultRow>& rows, const std::string& timings_text);

std::string ecdf_csv(const std::vector<EcdfReport>& reports);
std::string area_csv(const std::vector<EcdfReport>& reports, double nll_max);
/// Mean area and mean wall time per scheme.
std::string runtime_csv(const std::vector<EcdfReport>& reports, const std::vector<ResultRow>& rows,
                        double nll_max);
std::string jitter_csv(const std::vector<JitterRow>& rows);
std::string loo_csv(const std::vector<LooRecord>& records);

/// Writes `text` to `path`; throws IoError with the path on failure.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

// ---- configuration ----

nlohmann::json scheme_to_json(const SchemeConfig& scheme);
SchemeConfig scheme_from_json(const nlohmann::json& j);
/// "improved", "default" or "reference".
SchemeConfig preset(const std::string& name);

nlohmann::json matrix_to_json(const ExperimentMatrix& m);
/// Throws ConfigError on unknown keys, wrong types or invalid values.
ExperimentMatrix matrix_from_json(const nlohmann::json& j);
ExperimentMatrix load_matrix(const std::string& path);

nlohmann::json params_to_json(const ParamVector& p);

}  // namespace gpmle
