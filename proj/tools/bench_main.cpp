#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "detail/format.hpp"
#include "gpmle/bench.hpp"
#include "gpmle/errors.hpp"

namespace fs = std::filesystem;
using namespace gpmle;

namespace {

constexpr int kCellFailure = 1;
constexpr int kConfigError = 2;

std::vector<double> parse_ratios(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(detail::parse_double(cell));
  if (out.empty()) throw ConfigError("--ratios: empty list");
  return out;
}

KernelSpec kernel_from(const std::string& family, double nu, int dim) {
  if (family == "matern") return KernelSpec::matern(dim, nu);
  if (family == "squared_exponential") return KernelSpec::squared_exponential(dim);
  if (family == "rational_quadratic") return KernelSpec::rational_quadratic(dim, nu);
  throw ConfigError("unknown kernel family '" + family + "'");
}

int cmd_run(const std::string& config, const std::string& out_dir, int jobs,
            std::optional<std::uint64_t> seed) {
  ExperimentMatrix m = load_matrix(config);
  if (seed) m.master_seed = *seed;
  fs::create_directories(out_dir);
  const std::vector<ResultRow> rows = run_matrix(m, jobs);
  write_text((fs::path(out_dir) / "results.csv").string(), results_csv(rows));
  write_text((fs::path(out_dir) / "timings.csv").string(), timings_csv(rows));
  nlohmann::json manifest = matrix_to_json(m);
  const std::vector<std::string> missing = unavailable_datasets(m.datasets);
  manifest["unavailable_datasets"] = missing;
  manifest["complete"] = missing.empty();
  write_text((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  if (!missing.empty())
    std::cerr << "bench: matrix incomplete, " << missing.size() << " datasets unavailable\n";
  int failed = 0;
  for (const ResultRow& r : rows) failed += r.failed();
  std::cerr << "bench: " << rows.size() << " cells, " << failed << " failed\n";
  return failed ? kCellFailure : 0;
}

int cmd_ecdf(const std::string& in_dir, const std::string& reference, const std::string& out,
             double nll_max, const std::string& aggregate) {
  if (aggregate != "pooled" && aggregate != "mean")
    throw ConfigError("--aggregate must be 'pooled' or 'mean'");
  std::vector<ResultRow> rows = parse_results_csv(read_text((fs::path(in_dir) / "results.csv").string()));
  std::vector<EcdfReport> reports;
  for (const std::string& id : scheme_ids(rows))
    reports.push_back(ecdf_of_differences(rows, id, reference,
                                          aggregate == "mean" ? Aggregate::Mean : Aggregate::Pooled));
  write_text(out, ecdf_csv(reports));
  const fs::path stem = fs::path(out).replace_extension();
  write_text(stem.string() + "_area.csv", area_csv(reports, nll_max));
  const fs::path timings = fs::path(in_dir) / "timings.csv";
  if (fs::exists(timings)) {
    merge_timings(rows, read_text(timings.string()));
    write_text(stem.string() + "_runtime.csv", runtime_csv(reports, rows, nll_max));
  }
  std::cout << area_csv(reports, nll_max);
  return 0;
}

int cmd_jitter(const std::string& function, int n, const std::string& ratios, const std::string& out,
               std::uint64_t seed, const std::string& scheme) {
  const JitterScenario s = make_jitter_scenario(function, n, seed, preset(scheme));
  const std::string table = jitter_csv(jitter_study(s, parse_ratios(ratios)));
  write_text(out, table);
  std::cout << table;
  return 0;
}

int cmd_loo(const std::string& function, int n_mult, const std::string& scheme, const std::string& out,
            std::uint64_t seed, int jobs) {
  const TestFunction& fn = get_function(function);
  DesignSpec design;
  design.n = n_mult * fn.dim();
  design.seed = seed;
  const Dataset data = make_dataset(fn, design);
  const std::vector<LooRecord> records = loo_refit(preset(scheme), KernelSpec::matern(fn.dim()), data, jobs);
  write_text(out, loo_csv(records));
  std::cout << "loo_mse," << detail::format_double(loo_mse(records)) << '\n';
  for (const LooRecord& r : records)
    if (r.failed()) return kCellFailure;
  return 0;
}

int cmd_fit(const std::string& path, const std::string& scheme, const std::string& family, double nu) {
  const Dataset data = read_dataset_csv(path);
  const FitResult r = fit(preset(scheme), kernel_from(family, nu, data.dim()), data);
  nlohmann::json j = {{"scheme", scheme},
                      {"nll", r.nll},
                      {"params", params_to_json(r.params)},
                      {"termination", to_string(r.termination)},
                      {"n_runs", r.runs.size()},
                      {"n_evals", r.n_nll_evals},
                      {"wall_time", r.wall_time}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmarks for GP maximum likelihood estimation"};
  app.require_subcommand(1);

  std::string config, out, in, reference, function = "branin", scheme = "improved", ratios = "0,1e-8,1e-6,1e-4,1e-2",
                                           data, aggregate = "pooled", family = "matern";
  int jobs = 1, n = 20, n_mult = 3;
  double nll_max = 100.0, nu = 2.5;
  std::string jitter_scheme = "default";
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> master_seed;

  auto* run = app.add_subcommand("run", "Run an experiment matrix");
  run->add_option("--config", config, "JSON matrix description")->required();
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--jobs", jobs, "Parallel cells")->check(CLI::PositiveNumber);
  run->add_option("--seed", master_seed, "Override the master seed");

  auto* ecdf = app.add_subcommand("ecdf", "ECDF of NLL differences and areas");
  ecdf->add_option("--in", in, "Directory written by `bench run`")->required();
  ecdf->add_option("--reference", reference, "Reference scheme id")->required();
  ecdf->add_option("--out", out, "ECDF table (CSV)")->required();
  ecdf->add_option("--nll-max", nll_max, "Upper end of the integration window");
  ecdf->add_option("--aggregate", aggregate, "pooled or mean over repetitions");

  auto* jitter = app.add_subcommand("jitter", "Noise and conditioning versus noise variance");
  jitter->add_option("--function", function);
  jitter->add_option("--n", n)->check(CLI::PositiveNumber);
  jitter->add_option("--ratios", ratios, "Comma-separated noise-to-variance ratios");
  jitter->add_option("--out", out)->required();
  jitter->add_option("--seed", seed);
  jitter->add_option("--scheme", jitter_scheme, "Scheme used to fit the scenario");

  auto* loo = app.add_subcommand("loo", "Leave-one-out study with refits");
  loo->add_option("--function", function);
  loo->add_option("--n-mult", n_mult, "n = n_mult * d")->check(CLI::PositiveNumber);
  loo->add_option("--scheme", scheme);
  loo->add_option("--out", out)->required();
  loo->add_option("--seed", seed);
  loo->add_option("--jobs", jobs)->check(CLI::PositiveNumber);

  auto* fitcmd = app.add_subcommand("fit", "Fit one dataset and print the estimate as JSON");
  fitcmd->add_option("--data", data, "Dataset CSV")->required();
  fitcmd->add_option("--scheme", scheme);
  fitcmd->add_option("--kernel", family);
  fitcmd->add_option("--nu", nu);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return cmd_run(config, out, jobs, master_seed);
    if (*ecdf) return cmd_ecdf(in, reference, out, nll_max, aggregate);
    if (*jitter) return cmd_jitter(function, n, ratios, out, seed, jitter_scheme);
    if (*loo) return cmd_loo(function, n_mult, scheme, out, seed, jobs);
    if (*fitcmd) return cmd_fit(data, scheme, family, nu);
  } catch (const ConfigError& e) {
    std::cerr << "bench: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NotAvailable& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return kCellFailure;
  }
  return 0;
}
