#include "gpmle/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "detail/format.hpp"
#include "detail/parallel.hpp"
#include "gpmle/errors.hpp"

namespace gpmle {

using json = nlohmann::json;
using detail::format_double;
using detail::parse_double;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int budget(const SchemeConfig& s) {
  if (const auto* m = std::get_if<MultiStart>(&s.restart)) return m->n_opt;
  if (const auto* r = std::get_if<Restart>(&s.restart)) return r->n_opt;
  return 1;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

std::string join_ranges(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) out += ';';
    out += format_double(v[k]);
  }
  return out;
}

Eigen::VectorXd split_ranges(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ';'))
    if (!cell.empty()) vals.push_back(parse_double(cell));
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::vector<std::vector<std::string>> parse_table(const std::string& text,
                                                  const std::vector<std::string>& header) {
  std::stringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_csv_line(line) != header) throw IoError("unexpected table header '" + line + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw IoError("row with " + std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(header.size()));
    rows.push_back(std::move(cells));
  }
  return rows;
}

Termination parse_termination(const std::string& s) {
  for (Termination t : {Termination::PgTol, Termination::Factr, Termination::MaxIter,
                        Termination::LineSearchFailure})
    if (to_string(t) == s) return t;
  throw IoError("unknown termination '" + s + "'");
}

const std::vector<std::string> kResultsHeader = {
    "scheme",  "dataset",  "repetition", "status",   "nll",        "termination", "best_run",
    "n_runs",  "n_evals",  "variance",   "mean",     "noise_variance", "ranges",   "error"};
const std::vector<std::string> kTimingsHeader = {"scheme", "dataset", "repetition", "wall_time"};

}  // namespace

// ---- experiment matrix ----

void ExperimentMatrix::validate() const {
  if (datasets.empty()) throw ConfigError("matrix: no datasets");
  if (repetitions < 1) throw ConfigError("matrix: repetitions must be >= 1");
  try {
    reference.validate();
    for (const SchemeConfig& s : schemes) s.validate();
    kernel(1).validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("matrix: ") + e.what());
  }
  for (const SchemeConfig& s : schemes)
    if (budget(s) > budget(reference))
      throw ConfigError("matrix: scheme '" + s.id +
                        "' has a larger restart budget than the reference");
  for (const std::string& id : datasets) {
    try {
      corpus_entry(id);
    } catch (const ContractViolation& e) {
      throw ConfigError(std::string("matrix: ") + e.what());
    }
  }
}

KernelSpec ExperimentMatrix::kernel(int dim) const {
  KernelSpec k;
  k.family = family;
  k.nu = nu;
  k.dim = dim;
  return k;
}

std::vector<std::string> unavailable_datasets(const std::vector<std::string>& ids) {
  std::vector<std::string> out;
  for (const std::string& id : ids)
    if (!corpus_entry(id).available) out.push_back(id);
  return out;
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::uint64_t scheme_seed,
                        const std::string& dataset, int repetition) {
  const std::uint64_t h = detail::fnv1a(dataset);
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(scheme_seed),
                    static_cast<std::uint32_t>(scheme_seed >> 32),
                    static_cast<std::uint32_t>(h),
                    static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(repetition)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::vector<ResultRow> run_matrix(const ExperimentMatrix& m, int jobs) {
  m.validate();

  std::vector<std::string> ids;
  std::vector<Dataset> data;
  for (const std::string& id : m.datasets) {
    const CorpusEntry& entry = corpus_entry(id);
    if (!entry.available) continue;
    ids.push_back(id);
    data.push_back(make_corpus_dataset(entry, m.data_seed));
  }

  struct Cell {
    const SchemeConfig* scheme;
    std::size_t dataset;
    int repetition;
  };
  std::vector<Cell> cells;
  for (std::size_t d = 0; d < ids.size(); ++d) cells.push_back({&m.reference, d, 0});
  for (const SchemeConfig& s : m.schemes) {
    const int reps = s.stochastic() ? m.repetitions : 1;
    for (std::size_t d = 0; d < ids.size(); ++d)
      for (int r = 0; r < reps; ++r) cells.push_back({&s, d, r});
  }

  std::vector<ResultRow> rows(cells.size());
  detail::parallel_for(cells.size(), jobs, [&](std::size_t c) {
    const Cell& cell = cells[c];
    ResultRow& row = rows[c];
    row.scheme = cell.scheme->id;
    row.dataset = ids[cell.dataset];
    row.repetition = cell.repetition;
    SchemeConfig scheme = *cell.scheme;
    scheme.seed = cell_seed(m.master_seed, cell.scheme->seed, row.dataset, row.repetition);
    const Dataset& ds = data[cell.dataset];
    try {
      const FitResult fr = fit(scheme, m.kernel(ds.dim()), ds);
      row.nll = fr.nll;
      row.wall_time = fr.wall_time;
      row.termination = fr.termination;
      row.params = fr.params;
      row.best_run = fr.best_run;
      row.n_runs = static_cast<int>(fr.runs.size());
      row.n_evals = fr.n_nll_evals;
    } catch (const Error& e) {
      row.nll = kNaN;
      row.error = sanitize(e.what());
      if (row.error.empty()) row.error = "error";
    }
  });
  return rows;
}

bool any_failed(const std::vector<ResultRow>& rows) {
  return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.failed(); });
}

// ---- ECDF ----

double EcdfReport::operator()(double e) const {
  if (diffs.empty()) return 0.0;
  const auto it = std::upper_bound(diffs.begin(), diffs.end(), e);
  return static_cast<double>(it - diffs.begin()) / static_cast<double>(diffs.size());
}

EcdfReport ecdf_of_differences(const std::vector<ResultRow>& rows, const std::string& scheme,
                               const std::string& reference, Aggregate aggregate) {
  std::map<std::string, double> ref;
  for (const ResultRow& r : rows)
    if (r.scheme == reference && !r.failed() && !ref.count(r.dataset)) ref[r.dataset] = r.nll;

  EcdfReport report;
  report.scheme = scheme;
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_dataset;
  bool seen = false;
  for (const ResultRow& r : rows) {
    if (r.scheme != scheme) continue;
    seen = true;
    const auto it = ref.find(r.dataset);
    if (it == ref.end())
      throw MissingReference("no successful '" + reference + "' row for dataset " + r.dataset);
    double diff = std::numeric_limits<double>::infinity();
    if (r.failed()) ++report.failed;
    else diff = r.nll - it->second;
    if (!by_dataset.count(r.dataset)) order.push_back(r.dataset);
    by_dataset[r.dataset].push_back(diff);
  }
  if (!seen) throw ContractViolation("ecdf_of_differences: no rows for scheme '" + scheme + "'");

  for (const std::string& d : order) {
    const std::vector<double>& v = by_dataset[d];
    if (aggregate == Aggregate::Pooled) {
      report.diffs.insert(report.diffs.end(), v.begin(), v.end());
    } else {
      double sum = 0.0;
      for (double x : v) sum += x;
      report.diffs.push_back(sum / static_cast<double>(v.size()));
    }
  }
  for (double x : report.diffs)
    if (x < -1e-6) ++report.negative;
  std::sort(report.diffs.begin(), report.diffs.end());
  return report;
}

double area_under_ecdf(const EcdfReport& report, double nll_max) {
  if (!(nll_max > 0.0)) throw ContractViolation("area_under_ecdf: nll_max must be positive");
  if (report.diffs.empty()) return 0.0;
  // integral_0^M F(e) de = mean over diffs of (M - clamp(d, 0, M)).
  double sum = 0.0;
  for (double d : report.diffs) sum += nll_max - std::clamp(d, 0.0, nll_max);
  return 100.0 * sum / (nll_max * static_cast<double>(report.diffs.size()));
}

std::vector<std::string> scheme_ids(const std::vector<ResultRow>& rows) {
  std::vector<std::string> out;
  for (const ResultRow& r : rows)
    if (std::find(out.begin(), out.end(), r.scheme) == out.end()) out.push_back(r.scheme);
  return out;
}

// ---- jitter study ----

JitterScenario make_jitter_scenario(const std::string& function, int n, std::uint64_t seed,
                                    const SchemeConfig& scheme) {
  const TestFunction& fn = get_function(function);
  DesignSpec design;
  design.kind = DesignKind::LhsMdu;
  design.n = n;
  design.seed = seed;
  JitterScenario s;
  s.data = make_dataset(fn, design);
  s.spec = KernelSpec::matern(fn.dim());
  SchemeConfig sc = scheme;
  sc.estimate_noise = false;
  s.params = fit(sc, s.spec, s.data).params;
  s.params.noise_variance = 0.0;
  return s;
}

std::vector<JitterRow> jitter_study(const JitterScenario& scenario,
                                    const std::vector<double>& ratios,
                                    const JitterStudyOptions& options) {
  const KernelSpec& spec = scenario.spec;
  const Dataset& data = scenario.data;
  const int d = spec.dim;
  const double step = 1.0 / std::sqrt(static_cast<double>(d + 1));
  const Eigen::VectorXd residual = data.z.array() - scenario.params.mean;

  std::vector<JitterRow> out;
  for (double ratio : ratios) {
    if (!(ratio >= 0.0)) throw ContractViolation("jitter_study: ratios must be non-negative");
    ParamVector p = scenario.params;
    p.noise_variance = ratio * p.variance;

    JitterRow row;
    row.ratio = ratio;
    const Eigen::MatrixXd K = covariance_matrix(spec, p, data.X);
    const JitteredCholesky chol = cholesky_with_jitter(K, p.variance, options.jitter);
    row.jitter_used = chol.jitter_used();
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += row.jitter_used;
    const ConditioningReport cond = conditioning_report(Kj);
    row.kappa = cond.kappa;
    row.kappa_logdet = cond.kappa_logdet;
    row.nll = nll(spec, p, data, options.jitter);
    row.interp_error = normalized_interp_error(FittedGP(spec, p, data, options.jitter));

    // Transect along the unit diagonal of (log sigma^2, log rho_1, ..., log rho_d),
    // keeping the noise ratio and the jitter of the center point.
    const JitterOptions fixed = JitterOptions::fixed(row.jitter_used);
    auto factor_at = [&](double t) {
      ParamVector q = p;
      const double scale = std::exp(t * step);
      q.variance = p.variance * scale;
      q.ranges = p.ranges * scale;
      q.noise_variance = ratio * q.variance;
      return cholesky_with_jitter(covariance_matrix(spec, q, data.X), q.variance, fixed);
    };
    row.delta_quad =
        measure_numerical_noise([&](double t) { return residual.dot(factor_at(t).solve(residual)); },
                                0.0, options.half_width, options.num_points,
                                NoiseQuantity::QuadraticForm, "diagonal")
            .delta;
    row.delta_logdet = measure_numerical_noise([&](double t) { return factor_at(t).log_det(); }, 0.0,
                                               options.half_width, options.num_points,
                                               NoiseQuantity::LogDet, "diagonal")
                           .delta;
    out.push_back(row);
  }
  return out;
}

// ---- serialization ----

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < kResultsHeader.size(); ++i)
    os << (i ? "," : "") << kResultsHeader[i];
  os << '\n';
  for (const ResultRow& r : rows) {
    os << r.scheme << ',' << r.dataset << ',' << r.repetition << ',' << (r.failed() ? "failed" : "ok")
       << ',' << format_double(r.nll) << ',' << (r.termination ? to_string(*r.termination) : "")
       << ',' << r.best_run << ',' << r.n_runs << ',' << r.n_evals << ',';
    if (r.failed()) {
      os << ",,,";
    } else {
      os << format_double(r.params.variance) << ',' << format_double(r.params.mean) << ','
         << format_double(r.params.noise_variance) << ',' << join_ranges(r.params.ranges);
    }
    os << ',' << sanitize(r.error) << '\n';
  }
  return os.str();
}

std::string timings_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "scheme,dataset,repetition,wall_time\n";
  for (const ResultRow& r : rows)
    os << r.scheme << ',' << r.dataset << ',' << r.repetition << ',' << format_double(r.wall_time)
       << '\n';
  return os.str();
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::vector<ResultRow> out;
  for (const auto& c : parse_table(text, kResultsHeader)) {
    ResultRow r;
    r.scheme = c[0];
    r.dataset = c[1];
    r.repetition = std::stoi(c[2]);
    r.nll = parse_double(c[4]);
    if (!c[5].empty()) r.termination = parse_termination(c[5]);
    r.best_run = std::stoi(c[6]);
    r.n_runs = std::stoi(c[7]);
    r.n_evals = std::stoi(c[8]);
    if (c[3] == "failed") {
      r.error = c[13].empty() ? "failed" : c[13];
    } else {
      r.params.variance = parse_double(c[9]);
      r.params.mean = parse_double(c[10]);
      r.params.noise_variance = parse_double(c[11]);
      r.params.ranges = split_ranges(c[12]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void merge_timings(std::vector<ResultRow>& rows, const std::string& timings_text) {
  std::map<std::tuple<std::string, std::string, int>, double> t;
  for (const auto& c : parse_table(timings_text, kTimingsHeader))
    t[{c[0], c[1], std::stoi(c[2])}] = parse_double(c[3]);
  for (ResultRow& r : rows) {
    const auto it = t.find({r.scheme, r.dataset, r.repetition});
    r.wall_time = it == t.end() ? kNaN : it->second;
  }
}

std::string ecdf_csv(const std::vector<EcdfReport>& reports) {
  std::ostringstream os;
  os << "scheme,diff,ecdf\n";
  for (const EcdfReport& rep : reports) {
    const std::size_t n = rep.diffs.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (i + 1 < n && rep.diffs[i + 1] == rep.diffs[i]) continue;
      os << rep.scheme << ',' << format_double(rep.diffs[i]) << ','
         << format_double(static_cast<double>(i + 1) / static_cast<double>(n)) << '\n';
    }
  }
  return os.str();
}

std::string area_csv(const std::vector<EcdfReport>& reports, double nll_max) {
  std::ostringstream os;
  os << "scheme,area,nll_max,n,negative,failed\n";
  for (const EcdfReport& rep : reports)
    os << rep.scheme << ',' << format_double(area_under_ecdf(rep, nll_max)) << ','
       << format_double(nll_max) << ',' << rep.diffs.size() << ',' << rep.negative << ','
       << rep.failed << '\n';
  return os.str();
}

std::string runtime_csv(const std::vector<EcdfReport>& reports, const std::vector<ResultRow>& rows,
                        double nll_max) {
  std::ostringstream os;
  os << "scheme,area,mean_wall_time\n";
  for (const EcdfReport& rep : reports) {
    double sum = 0.0;
    int count = 0;
    for (const ResultRow& r : rows)
      if (r.scheme == rep.scheme && std::isfinite(r.wall_time)) {
        sum += r.wall_time;
        ++count;
      }
    os << rep.scheme << ',' << format_double(area_under_ecdf(rep, nll_max)) << ','
       << format_double(count ? sum / count : kNaN) << '\n';
  }
  return os.str();
}

std::string jitter_csv(const std::vector<JitterRow>& rows) {
  std::ostringstream os;
  os << "ratio,kappa,kappa_logdet,delta_quad,delta_logdet,nll,interp_error,jitter_used\n";
  for (const JitterRow& r : rows)
    os << format_double(r.ratio) << ',' << format_double(r.kappa) << ','
       << format_double(r.kappa_logdet) << ',' << format_double(r.delta_quad) << ','
       << format_double(r.delta_logdet) << ',' << format_double(r.nll) << ','
       << format_double(r.interp_error) << ',' << format_double(r.jitter_used) << '\n';
  return os.str();
}

std::string loo_csv(const std::vector<LooRecord>& records) {
  std::ostringstream os;
  os << "index,status,nll,sq_error,variance,mean,ranges,error\n";
  for (const LooRecord& r : records) {
    os << r.index << ',' << (r.failed() ? "failed" : "ok") << ',' << format_double(r.nll) << ','
       << format_double(r.sq_error) << ',';
    if (r.failed()) os << ",,";
    else
      os << format_double(r.params.variance) << ',' << format_double(r.params.mean) << ','
         << join_ranges(r.params.ranges);
    os << ',' << sanitize(r.error) << '\n';
  }
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// ---- configuration ----

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

InitStrategy init_from_json(const json& j, const std::string& where) {
  const std::string kind = j.is_string() ? j.get<std::string>() : get<std::string>(j, "kind", where);
  if (j.is_object()) {
    if (kind == "profiled") check_keys(j, {"kind", "alpha"}, where);
    else if (kind == "grid_search")
      check_keys(j, {"kind", "levels", "alpha_min", "alpha_max", "noise_ratio"}, where);
    else check_keys(j, {"kind"}, where);
  } else if (!j.is_string()) {
    throw ConfigError(where + ": expected a string or an object");
  }
  if (kind == "constant") return ConstantInit{};
  if (kind == "moment") return MomentInit{};
  if (kind == "profiled") {
    ProfiledInit p;
    if (j.is_object() && j.contains("alpha")) p.alpha = get<double>(j, "alpha", where);
    return p;
  }
  if (kind == "grid_search") {
    GridSearchInit g;
    if (j.is_object()) {
      if (j.contains("levels")) g.levels = get<int>(j, "levels", where);
      if (j.contains("alpha_min")) g.alpha_min = get<double>(j, "alpha_min", where);
      if (j.contains("alpha_max")) g.alpha_max = get<double>(j, "alpha_max", where);
      if (j.contains("noise_ratio")) g.noise_ratio = get<double>(j, "noise_ratio", where);
    }
    return g;
  }
  throw ConfigError(where + ": unknown init kind '" + kind + "'");
}

json init_to_json(const InitStrategy& init) {
  if (const auto* p = std::get_if<ProfiledInit>(&init)) return {{"kind", "profiled"}, {"alpha", p->alpha}};
  if (const auto* g = std::get_if<GridSearchInit>(&init))
    return {{"kind", "grid_search"},
            {"levels", g->levels},
            {"alpha_min", g->alpha_min},
            {"alpha_max", g->alpha_max},
            {"noise_ratio", g->noise_ratio}};
  return {{"kind", init_name(init)}};
}

ReparamChoice reparam_from_string(const std::string& s, const std::string& where) {
  for (ReparamChoice c : {ReparamChoice::Log, ReparamChoice::InvSoftplus,
                          ReparamChoice::InvSoftplusStandardized})
    if (reparam_name(c) == s) return c;
  throw ConfigError(where + ": unknown reparam '" + s + "'");
}

StoppingRule stopping_from_json(const json& j, const std::string& where) {
  if (j.is_string()) {
    if (j == "soft") return StoppingRule::soft();
    if (j == "strict") return StoppingRule::strict();
    throw ConfigError(where + ": unknown stopping rule '" + j.get<std::string>() + "'");
  }
  check_keys(j, {"maxiter", "factr", "pgtol"}, where);
  StoppingRule s = StoppingRule::soft();
  if (j.contains("maxiter")) s.maxiter = get<int>(j, "maxiter", where);
  if (j.contains("factr")) s.factr = get<double>(j, "factr", where);
  if (j.contains("pgtol")) s.pgtol = get<double>(j, "pgtol", where);
  return s;
}

RestartPolicy restart_from_json(const json& j, const std::string& where) {
  const std::string kind = j.is_string() ? j.get<std::string>() : get<std::string>(j, "kind", where);
  if (kind == "none") {
    if (j.is_object()) check_keys(j, {"kind"}, where);
    return NoRestart{};
  }
  if (kind == "restart") {
    Restart r;
    if (j.is_object()) {
      check_keys(j, {"kind", "n_opt", "exhaust_budget"}, where);
      if (j.contains("n_opt")) r.n_opt = get<int>(j, "n_opt", where);
      if (j.contains("exhaust_budget")) r.exhaust_budget = get<bool>(j, "exhaust_budget", where);
    }
    return r;
  }
  if (kind == "multistart") {
    MultiStart m;
    if (j.is_object()) {
      check_keys(j, {"kind", "n_opt", "sigma_eta"}, where);
      if (j.contains("n_opt")) m.n_opt = get<int>(j, "n_opt", where);
      if (j.contains("sigma_eta")) m.sigma_eta = get<double>(j, "sigma_eta", where);
    }
    return m;
  }
  throw ConfigError(where + ": unknown restart kind '" + kind + "'");
}

json restart_to_json(const RestartPolicy& r) {
  if (const auto* x = std::get_if<Restart>(&r))
    return {{"kind", "restart"}, {"n_opt", x->n_opt}, {"exhaust_budget", x->exhaust_budget}};
  if (const auto* m = std::get_if<MultiStart>(&r))
    return {{"kind", "multistart"}, {"n_opt", m->n_opt}, {"sigma_eta", m->sigma_eta}};
  return {{"kind", "none"}};
}

KernelFamily family_from_string(const std::string& s) {
  if (s == "matern") return KernelFamily::Matern;
  if (s == "squared_exponential") return KernelFamily::SquaredExponential;
  if (s == "rational_quadratic") return KernelFamily::RationalQuadratic;
  throw ConfigError("kernel: unknown family '" + s + "'");
}

std::string family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::Matern:
      return "matern";
    case KernelFamily::SquaredExponential:
      return "squared_exponential";
    case KernelFamily::RationalQuadratic:
      return "rational_quadratic";
  }
  return "unknown";
}

}  // namespace

SchemeConfig preset(const std::string& name) {
  if (name == "improved") return SchemeConfig::improved();
  if (name == "default") return SchemeConfig::default_preset();
  if (name == "reference") return SchemeConfig::reference();
  throw ConfigError("unknown scheme preset '" + name + "'");
}

json scheme_to_json(const SchemeConfig& s) {
  return {{"id", s.id},
          {"init", init_to_json(s.init)},
          {"reparam", reparam_name(s.reparam)},
          {"stopping", {{"maxiter", s.stopping.maxiter}, {"factr", s.stopping.factr}, {"pgtol", s.stopping.pgtol}}},
          {"restart", restart_to_json(s.restart)},
          {"seed", s.seed},
          {"estimate_noise", s.estimate_noise},
          {"jitter", {{"min_jitter", s.jitter.min_jitter}, {"ladder", s.jitter.ladder}}}};
}

SchemeConfig scheme_from_json(const json& j) {
  if (j.is_string()) return preset(j.get<std::string>());
  check_keys(j, {"id", "preset", "init", "reparam", "stopping", "restart", "seed", "estimate_noise", "jitter"},
             "scheme");
  SchemeConfig s;
  if (j.contains("preset")) {
    s = preset(get<std::string>(j, "preset", "scheme"));
  }
  if (j.contains("id")) s.id = get<std::string>(j, "id", "scheme");
  if (s.id.empty()) throw ConfigError("scheme: missing id");
  const std::string where = "scheme '" + s.id + "'";
  if (j.contains("init")) s.init = init_from_json(j.at("init"), where + ".init");
  if (j.contains("reparam")) s.reparam = reparam_from_string(get<std::string>(j, "reparam", where), where);
  if (j.contains("stopping")) s.stopping = stopping_from_json(j.at("stopping"), where + ".stopping");
  if (j.contains("restart")) s.restart = restart_from_json(j.at("restart"), where + ".restart");
  if (j.contains("seed")) s.seed = get<std::uint64_t>(j, "seed", where);
  if (j.contains("estimate_noise")) s.estimate_noise = get<bool>(j, "estimate_noise", where);
  if (j.contains("jitter")) {
    const json& jj = j.at("jitter");
    check_keys(jj, {"min_jitter", "ladder"}, where + ".jitter");
    if (jj.contains("min_jitter")) s.jitter.min_jitter = get<double>(jj, "min_jitter", where);
    if (jj.contains("ladder")) s.jitter.ladder = get<std::vector<double>>(jj, "ladder", where);
  }
  try {
    s.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return s;
}

json matrix_to_json(const ExperimentMatrix& m) {
  json schemes = json::array();
  for (const SchemeConfig& s : m.schemes) schemes.push_back(scheme_to_json(s));
  return {{"schemes", schemes},
          {"reference", scheme_to_json(m.reference)},
          {"datasets", m.datasets},
          {"repetitions", m.repetitions},
          {"master_seed", m.master_seed},
          {"data_seed", m.data_seed},
          {"kernel", {{"family", family_name(m.family)}, {"nu", m.nu}}}};
}

ExperimentMatrix matrix_from_json(const json& j) {
  check_keys(j, {"schemes", "reference", "datasets", "repetitions", "master_seed", "data_seed", "kernel"},
             "config");
  ExperimentMatrix m;
  if (!j.contains("schemes") || !j.at("schemes").is_array())
    throw ConfigError("config: 'schemes' must be an array");
  std::set<std::string> seen;
  for (const json& s : j.at("schemes")) {
    m.schemes.push_back(scheme_from_json(s));
    if (!seen.insert(m.schemes.back().id).second)
      throw ConfigError("config: duplicate scheme id '" + m.schemes.back().id + "'");
  }
  if (j.contains("reference")) m.reference = scheme_from_json(j.at("reference"));
  if (seen.count(m.reference.id))
    throw ConfigError("config: scheme id '" + m.reference.id + "' is used by the reference");
  if (!j.contains("datasets")) throw ConfigError("config: missing 'datasets'");
  const json& ds = j.at("datasets");
  if (ds.is_string() && ds == "all") {
    for (const CorpusEntry& e : corpus_plan()) m.datasets.push_back(e.id());
  } else {
    m.datasets = get<std::vector<std::string>>(j, "datasets", "config");
  }
  if (j.contains("repetitions")) m.repetitions = get<int>(j, "repetitions", "config");
  if (j.contains("master_seed")) m.master_seed = get<std::uint64_t>(j, "master_seed", "config");
  if (j.contains("data_seed")) m.data_seed = get<std::uint64_t>(j, "data_seed", "config");
  if (j.contains("kernel")) {
    const json& k = j.at("kernel");
    check_keys(k, {"family", "nu"}, "config.kernel");
    if (k.contains("family")) m.family = family_from_string(get<std::string>(k, "family", "config.kernel"));
    if (k.contains("nu")) m.nu = get<double>(k, "nu", "config.kernel");
  }
  m.validate();
  return m;
}

ExperimentMatrix load_matrix(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return matrix_from_json(j);
}

json params_to_json(const ParamVector& p) {
  return {{"variance", p.variance},
          {"ranges", std::vector<double>(p.ranges.data(), p.ranges.data() + p.ranges.size())},
          {"noise_variance", p.noise_variance},
          {"mean", p.mean}};
}

}  // namespace gpmle
