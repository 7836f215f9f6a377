#include "gpmle/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "detail/format.hpp"
#include "gpmle/errors.hpp"

namespace gpmle {

namespace {

Domain make_domain(std::initializer_list<std::pair<double, double>> bounds) {
  Domain d;
  d.lower.resize(static_cast<Eigen::Index>(bounds.size()));
  d.upper.resize(static_cast<Eigen::Index>(bounds.size()));
  Eigen::Index k = 0;
  for (const auto& [lo, hi] : bounds) {
    d.lower[k] = lo;
    d.upper[k++] = hi;
  }
  return d;
}

const std::vector<std::string> kUnavailable = {"g10mod", "g10modmod"};

const std::map<std::string, TestFunction>& registry() {
  static const std::map<std::string, TestFunction> r = [] {
    std::map<std::string, TestFunction> m;
    m["branin"] = {"branin", make_domain({{-5.0, 10.0}, {0.0, 15.0}}), branin};
    m["borehole"] = {"borehole",
                     make_domain({{0.05, 0.15},
                                  {100.0, 50000.0},
                                  {63070.0, 115600.0},
                                  {990.0, 1110.0},
                                  {63.1, 116.0},
                                  {700.0, 820.0},
                                  {1120.0, 1680.0},
                                  {9855.0, 12045.0}}),
                     borehole};
    m["welded_beam"] = {"welded_beam",
                        make_domain({{0.125, 5.0}, {0.1, 10.0}, {0.1, 10.0}, {0.125, 5.0}}),
                        welded_beam};
    m["g10"] = {"g10",
                make_domain({{100.0, 10000.0},
                             {1000.0, 10000.0},
                             {1000.0, 10000.0},
                             {10.0, 1000.0},
                             {10.0, 1000.0},
                             {10.0, 1000.0},
                             {10.0, 1000.0},
                             {10.0, 1000.0}}),
                g10};
    return m;
  }();
  return r;
}

void require_dim(const Eigen::Ref<const Eigen::VectorXd>& x, int d, const char* name) {
  if (x.size() != d) throw ContractViolation(std::string(name) + ": wrong input dimension");
}

}  // namespace

bool Domain::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != lower.size()) return false;
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Eigen::VectorXd Domain::from_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  const Eigen::VectorXd x = lower.array() + u.array() * (upper - lower).array();
  return x.cwiseMax(lower).cwiseMin(upper);
}

double branin(const Eigen::Ref<const Eigen::VectorXd>& x) {
  require_dim(x, 2, "branin");
  constexpr double pi = std::numbers::pi;
  const double b = 5.1 / (4.0 * pi * pi);
  const double c = 5.0 / pi;
  const double t = 1.0 / (8.0 * pi);
  const double u = x[1] - b * x[0] * x[0] + c * x[0] - 6.0;
  return u * u + 10.0 * (1.0 - t) * std::cos(x[0]) + 10.0;
}

double borehole(const Eigen::Ref<const Eigen::VectorXd>& x) {
  require_dim(x, 8, "borehole");
  const double rw = x[0], r = x[1], Tu = x[2], Hu = x[3], Tl = x[4], Hl = x[5], L = x[6], Kw = x[7];
  const double lr = std::log(r / rw);
  return 2.0 * std::numbers::pi * Tu * (Hu - Hl) /
         (lr * (1.0 + 2.0 * L * Tu / (lr * rw * rw * Kw) + Tu / Tl));
}

double welded_beam(const Eigen::Ref<const Eigen::VectorXd>& x) {
  require_dim(x, 4, "welded_beam");
  const double h = x[0], l = x[1], t = x[2], b = x[3];
  return 1.10471 * h * h * l + 0.04811 * t * b * (14.0 + l);
}

double g10(const Eigen::Ref<const Eigen::VectorXd>& x) {
  require_dim(x, 8, "g10");
  return x[0] + x[1] + x[2];
}

const std::vector<std::string>& function_names() {
  static const std::vector<std::string> names = {"branin", "borehole", "welded_beam",
                                                 "g10",    "g10mod",   "g10modmod"};
  return names;
}

bool function_available(const std::string& name) { return registry().count(name) > 0; }

const TestFunction& get_function(const std::string& name) {
  const auto it = registry().find(name);
  if (it != registry().end()) return it->second;
  if (std::find(kUnavailable.begin(), kUnavailable.end(), name) != kUnavailable.end())
    throw NotAvailable("test function '" + name + "' has no closed form implemented yet");
  throw ContractViolation("unknown test function '" + name + "'");
}

double evaluate(const TestFunction& fn, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!fn.domain.contains(x)) throw OutOfDomain(fn.name + ": point outside the domain");
  return fn.f(x);
}

std::string design_name(DesignKind kind) {
  return kind == DesignKind::LhsMdu ? "lhs_mdu" : "uniform";
}

DesignKind parse_design_kind(const std::string& name) {
  if (name == "lhs_mdu") return DesignKind::LhsMdu;
  if (name == "uniform") return DesignKind::UniformRandom;
  throw ContractViolation("unknown design kind '" + name + "'");
}

void DesignSpec::validate() const {
  if (n < 1) throw ContractViolation("DesignSpec: n must be >= 1");
  if (candidates < 1) throw ContractViolation("DesignSpec: candidates must be >= 1");
}

namespace {

Eigen::MatrixXd lhs_from(std::mt19937_64& rng, int n, int d) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd X(n, d);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int k = 0; k < d; ++k) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n; ++i) X(i, k) = (perm[i] + unif(rng)) / n;
  }
  return X;
}

std::mt19937_64 design_stream(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Eigen::MatrixXd random_lhs(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw ContractViolation("random_lhs: need n, d >= 1");
  std::mt19937_64 rng = design_stream(seed);
  return lhs_from(rng, n, d);
}

double min_pairwise_distance(const Eigen::MatrixXd& X) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = i + 1; j < X.rows(); ++j)
      best = std::min(best, (X.row(i) - X.row(j)).squaredNorm());
  return std::sqrt(best);
}

Eigen::MatrixXd generate_unit_design(const DesignSpec& spec, int d) {
  spec.validate();
  if (d < 1) throw ContractViolation("generate_design: need d >= 1");
  std::mt19937_64 rng = design_stream(spec.seed);
  if (spec.kind == DesignKind::UniformRandom) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd X(spec.n, d);
    for (int i = 0; i < spec.n; ++i)
      for (int k = 0; k < d; ++k) X(i, k) = unif(rng);
    return X;
  }
  Eigen::MatrixXd best = lhs_from(rng, spec.n, d);
  double best_dist = min_pairwise_distance(best);
  for (int c = 1; c < spec.candidates; ++c) {
    Eigen::MatrixXd cand = lhs_from(rng, spec.n, d);
    const double dist = min_pairwise_distance(cand);
    if (dist > best_dist) {
      best_dist = dist;
      best = std::move(cand);
    }
  }
  return best;
}

Eigen::MatrixXd generate_design(const DesignSpec& spec, const Domain& domain) {
  const Eigen::MatrixXd U = generate_unit_design(spec, domain.dim());
  Eigen::MatrixXd X(U.rows(), U.cols());
  for (Eigen::Index i = 0; i < U.rows(); ++i) X.row(i) = domain.from_unit(U.row(i).transpose());
  return X;
}

Dataset make_dataset(const TestFunction& fn, const DesignSpec& spec) {
  Dataset data;
  data.X = generate_design(spec, fn.domain);
  data.z.resize(data.X.rows());
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) data.z[i] = evaluate(fn, data.X.row(i).transpose());
  data.meta = DatasetMeta{fn.name, design_name(spec.kind), spec.seed};
  return data;
}

std::string CorpusEntry::id() const { return function + "_" + std::to_string(multiplier) + "d"; }

std::vector<CorpusEntry> corpus_plan() {
  static const std::map<std::string, int> dims = {{"branin", 2}, {"borehole", 8},
                                                  {"welded_beam", 4}, {"g10", 8},
                                                  {"g10mod", 8}, {"g10modmod", 8}};
  std::vector<CorpusEntry> out;
  for (const std::string& name : function_names())
    for (int m : corpus_multipliers()) out.push_back({name, m, m * dims.at(name), function_available(name)});
  return out;
}

std::vector<CorpusEntry> available_corpus() {
  std::vector<CorpusEntry> out;
  for (const CorpusEntry& e : corpus_plan())
    if (e.available) out.push_back(e);
  return out;
}

const CorpusEntry& corpus_entry(const std::string& id) {
  static const std::vector<CorpusEntry> plan = corpus_plan();
  for (const CorpusEntry& e : plan)
    if (e.id() == id) return e;
  throw ContractViolation("unknown dataset id '" + id + "'");
}

Dataset make_corpus_dataset(const CorpusEntry& entry, std::uint64_t data_seed) {
  const TestFunction& fn = get_function(entry.function);
  DesignSpec spec;
  spec.kind = DesignKind::LhsMdu;
  spec.n = entry.n;
  spec.seed = detail::fnv1a(entry.id()) ^ data_seed;
  return make_dataset(fn, spec);
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  data.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (data.meta) {
    out << "# function: " << data.meta->function << '\n';
    out << "# n: " << data.n() << '\n';
    out << "# seed: " << data.meta->seed << '\n';
    out << "# design: " << data.meta->design << '\n';
  }
  for (int k = 0; k < data.dim(); ++k) out << "x_" << (k + 1) << ',';
  out << "z\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int k = 0; k < data.dim(); ++k) out << detail::format_double(data.X(i, k)) << ',';
    out << detail::format_double(data.z[i]) << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  DatasetMeta meta;
  bool has_meta = false;
  int columns = -1;
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      key.erase(0, key.find_first_not_of(' '));
      value.erase(0, value.find_first_not_of(' '));
      has_meta = true;
      if (key == "function") meta.function = value;
      else if (key == "design") meta.design = value;
      else if (key == "seed") meta.seed = std::stoull(value);
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (columns < 0) {
      columns = static_cast<int>(cells.size());
      if (columns < 2 || cells.back() != "z")
        throw IoError(path + ": header must be x_1,...,x_d,z");
      continue;
    }
    if (static_cast<int>(cells.size()) != columns) {
      std::ostringstream os;
      os << path << ":" << line_no << ": expected " << columns << " columns";
      throw IoError(os.str());
    }
    std::vector<double> row;
    try {
      for (const std::string& c : cells) row.push_back(detail::parse_double(c));
    } catch (const IoError& e) {
      throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    rows.push_back(std::move(row));
  }
  if (columns < 0 || rows.empty()) throw IoError(path + ": no data rows");
  Dataset data;
  const int d = columns - 1;
  data.X.resize(static_cast<Eigen::Index>(rows.size()), d);
  data.z.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int k = 0; k < d; ++k) data.X(static_cast<Eigen::Index>(i), k) = rows[i][k];
    data.z[static_cast<Eigen::Index>(i)] = rows[i][d];
  }
  if (has_meta) data.meta = meta;
  data.validate();
  return data;
}

}  // namespace gpmle
