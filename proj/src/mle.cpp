#include "gpmle/mle.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "gpmle/errors.hpp"

namespace gpmle {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Eigen::VectorXd column_std(const Eigen::MatrixXd& X) {
  const Eigen::RowVectorXd mean = X.colwise().mean();
  return ((X.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(X.rows()))
      .sqrt()
      .transpose();
}

void check_data(const KernelSpec& spec, const Dataset& data) {
  spec.validate();
  data.validate();
  if (data.dim() != spec.dim) throw ContractViolation("mle: data dimension mismatch");
}

}  // namespace

std::string init_name(const InitStrategy& init) {
  return std::visit(overloaded{[](const ConstantInit&) { return std::string("constant"); },
                               [](const MomentInit&) { return std::string("moment"); },
                               [](const ProfiledInit&) { return std::string("profiled"); },
                               [](const GridSearchInit&) { return std::string("grid_search"); }},
                    init);
}

ParamVector init_constant(const Dataset& data) {
  data.validate();
  ParamVector p;
  p.mean = 0.0;
  p.variance = 1.0;
  p.ranges = Eigen::VectorXd::Ones(data.dim());
  p.noise_variance = 0.0;
  return p;
}

ParamVector init_moment_based(const Dataset& data) {
  data.validate();
  const Eigen::VectorXd ranges = column_std(data.X);
  for (Eigen::Index k = 0; k < ranges.size(); ++k)
    if (!(ranges[k] > 0.0)) {
      std::ostringstream os;
      os << "init_moment_based: input coordinate " << k << " is constant";
      throw DegenerateDesign(os.str());
    }
  ParamVector p;
  p.mean = data.z.mean();
  p.variance = (data.z.array() - p.mean).square().mean();
  if (!(p.variance > 0.0)) throw ConstantData("init_moment_based: observations are constant");
  p.ranges = ranges;
  p.noise_variance = 0.0;
  return p;
}

ParamVector init_profiled(const KernelSpec& spec, const Dataset& data,
                          const std::optional<Eigen::VectorXd>& ranges, double alpha,
                          const JitterOptions& jitter) {
  check_data(spec, data);
  Eigen::VectorXd rho;
  if (ranges) {
    rho = *ranges;
  } else {
    rho = column_std(data.X);
    for (Eigen::Index k = 0; k < rho.size(); ++k)
      if (!(rho[k] > 0.0)) throw DegenerateDesign("init_profiled: input coordinate is constant");
  }
  const ProfiledMeanVar prof = profile_mean_var(spec, rho, alpha, data, jitter);
  ParamVector p;
  p.mean = prof.mean;
  p.variance = prof.variance;
  p.ranges = rho;
  p.noise_variance = alpha * prof.variance;
  return p;
}

Eigen::VectorXd nominal_ranges(const Dataset& data) {
  data.validate();
  const double sqrt_d = std::sqrt(static_cast<double>(data.dim()));
  Eigen::VectorXd rho0 = sqrt_d * (data.X.colwise().maxCoeff() - data.X.colwise().minCoeff()).transpose();
  for (Eigen::Index k = 0; k < rho0.size(); ++k)
    if (!(rho0[k] > 0.0)) throw DegenerateDesign("nominal_ranges: input coordinate is constant");
  return rho0;
}

std::vector<double> grid_multipliers(int levels, double alpha_min, double alpha_max) {
  if (levels < 2 || !(alpha_min > 0.0) || !(alpha_max > alpha_min))
    throw ContractViolation("grid_multipliers: need L >= 2 and 0 < alpha_min < alpha_max");
  std::vector<double> out(static_cast<std::size_t>(levels));
  const double lo = std::log(alpha_min);
  const double hi = std::log(alpha_max);
  for (int i = 0; i < levels; ++i) out[i] = std::exp(lo + (hi - lo) * i / (levels - 1));
  out.front() = alpha_min;
  out.back() = alpha_max;
  return out;
}

ParamVector init_grid_search(const KernelSpec& spec, const Dataset& data,
                             const GridSearchInit& grid, const JitterOptions& jitter,
                             const std::vector<Eigen::VectorXd>& extra_candidates) {
  check_data(spec, data);
  const Eigen::VectorXd rho0 = nominal_ranges(data);
  std::vector<Eigen::VectorXd> candidates;
  for (double a : grid_multipliers(grid.levels, grid.alpha_min, grid.alpha_max))
    candidates.emplace_back(a * rho0);
  candidates.insert(candidates.end(), extra_candidates.begin(), extra_candidates.end());

  std::optional<ParamVector> best;
  double best_nll = std::numeric_limits<double>::infinity();
  std::string last_error;
  for (const Eigen::VectorXd& rho : candidates) {
    try {
      ParamVector p = init_profiled(spec, data, rho, grid.noise_ratio, jitter);
      const double value = nll(spec, p, data, jitter);
      if (value < best_nll) {
        best_nll = value;
        best = std::move(p);
      }
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (!best) throw InitFailed("init_grid_search: every grid point failed: " + last_error);
  return *best;
}

ParamVector initialize(const InitStrategy& init, const KernelSpec& spec, const Dataset& data,
                       const JitterOptions& jitter) {
  return std::visit(
      overloaded{[&](const ConstantInit&) { return init_constant(data); },
                 [&](const MomentInit&) { return init_moment_based(data); },
                 [&](const ProfiledInit& p) {
                   return init_profiled(spec, data, std::nullopt, p.alpha, jitter);
                 },
                 [&](const GridSearchInit& g) { return init_grid_search(spec, data, g, jitter); }},
      init);
}

double default_sigma_eta() { return std::log10(5.0) / 1.96; }

Eigen::VectorXd perturb_ranges(const Eigen::VectorXd& ranges, double sigma_eta,
                               std::mt19937_64& rng) {
  std::normal_distribution<double> eta(0.0, sigma_eta);
  Eigen::VectorXd out(ranges.size());
  for (Eigen::Index k = 0; k < ranges.size(); ++k) out[k] = ranges[k] * std::pow(10.0, eta(rng));
  return out;
}

std::mt19937_64 run_stream(std::uint64_t seed, std::uint64_t run_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run_index),
                    static_cast<std::uint32_t>(run_index >> 32)};
  return std::mt19937_64(seq);
}

std::string reparam_name(ReparamChoice choice) {
  switch (choice) {
    case ReparamChoice::Log:
      return "log";
    case ReparamChoice::InvSoftplus:
      return "invsoftplus";
    case ReparamChoice::InvSoftplusStandardized:
      return "invsoftplus_std";
  }
  return "unknown";
}

Reparam make_reparam(ReparamChoice choice, const Dataset& data, bool estimate_noise) {
  const ParamLayout layout{data.dim(), estimate_noise};
  switch (choice) {
    case ReparamChoice::Log:
      return Reparam::log();
    case ReparamChoice::InvSoftplus:
      return Reparam::inv_softplus(std::vector<double>(layout.num_positive(), 1.0));
    case ReparamChoice::InvSoftplusStandardized: {
      std::vector<double> scales(layout.num_positive(), 1.0);
      const Eigen::VectorXd sd = column_std(data.X);
      for (int k = 0; k < data.dim(); ++k) {
        if (!(sd[k] > 0.0)) throw DegenerateDesign("make_reparam: input coordinate is constant");
        scales[1 + k] = sd[k];
      }
      return Reparam::inv_softplus(std::move(scales));
    }
  }
  throw ContractViolation("make_reparam: unknown choice");
}

SchemeConfig SchemeConfig::improved() {
  SchemeConfig s;
  s.id = "improved";
  s.init = GridSearchInit{};
  s.reparam = ReparamChoice::Log;
  s.stopping = StoppingRule::soft();
  s.restart = Restart{5, false};
  return s;
}

SchemeConfig SchemeConfig::default_preset() {
  SchemeConfig s;
  s.id = "default";
  s.init = ConstantInit{};
  s.reparam = ReparamChoice::InvSoftplus;
  s.stopping = StoppingRule::soft();
  s.restart = NoRestart{};
  return s;
}

SchemeConfig SchemeConfig::reference(int n_opt) {
  SchemeConfig s;
  s.id = "reference";
  s.init = GridSearchInit{};
  s.reparam = ReparamChoice::Log;
  s.stopping = StoppingRule::strict();
  s.restart = MultiStart{n_opt, default_sigma_eta()};
  return s;
}

void SchemeConfig::validate() const {
  stopping.validate();
  jitter.validate();
  std::visit(overloaded{[](const NoRestart&) {},
                        [](const Restart& r) {
                          if (r.n_opt < 1) throw ContractViolation("Restart: n_opt must be >= 1");
                        },
                        [](const MultiStart& m) {
                          if (m.n_opt < 1) throw ContractViolation("MultiStart: n_opt must be >= 1");
                          if (!(m.sigma_eta > 0.0))
                            throw ContractViolation("MultiStart: sigma_eta must be positive");
                        }},
             restart);
  if (const auto* g = std::get_if<GridSearchInit>(&init))
    grid_multipliers(g->levels, g->alpha_min, g->alpha_max);
  if (const auto* p = std::get_if<ProfiledInit>(&init); p && !(p->alpha >= 0.0))
    throw ContractViolation("ProfiledInit: alpha must be non-negative");
}

namespace {

struct RunOutcome {
  RunTrace trace;
  Eigen::VectorXd x;
};

class SchemeRunner {
 public:
  SchemeRunner(const SchemeConfig& scheme, const KernelSpec& spec, const Dataset& data)
      : scheme_(scheme), spec_(spec), data_(data), layout_{spec.dim, scheme.estimate_noise},
        reparam_(make_reparam(scheme.reparam, data, scheme.estimate_noise)),
        options_{scheme.jitter, scheme.estimate_noise} {
    objective_ = [this](const Eigen::VectorXd& x, Eigen::VectorXd& grad) -> double {
      try {
        const ParamVector p = layout_.unpack(x, reparam_, fixed_noise_);
        const NllValueGrad r = nll_grad(spec_, p, data_, reparam_, options_);
        grad = r.grad;
        return r.value;
      } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    const Eigen::Index n = layout_.size();
    bounds_ = BoxBounds::unbounded(n);
    if (scheme.bounds.lower.size() == n) bounds_.lower = scheme.bounds.lower;
    else if (scheme.bounds.lower.size() != 0)
      throw ContractViolation("SchemeConfig: lower bound size mismatch");
    if (scheme.bounds.upper.size() == n) bounds_.upper = scheme.bounds.upper;
    else if (scheme.bounds.upper.size() != 0)
      throw ContractViolation("SchemeConfig: upper bound size mismatch");
  }

  void set_fixed_noise(double v) { fixed_noise_ = v; }
  const ParamLayout& layout() const { return layout_; }
  const Reparam& reparam() const { return reparam_; }

  RunOutcome run_from_params(const ParamVector& start) {
    RunOutcome out;
    out.trace.init = start;
    try {
      ParamVector s = start;
      if (scheme_.estimate_noise && !(s.noise_variance > 0.0)) s.noise_variance = 1e-6 * s.variance;
      Eigen::VectorXd x0 = layout_.pack(s, reparam_);
      x0 = x0.cwiseMax(bounds_.lower).cwiseMin(bounds_.upper);
      return run_from_x(x0, std::move(out));
    } catch (const Error& e) {
      out.trace.error = e.what();
      return out;
    }
  }

  RunOutcome run_from_x(const Eigen::VectorXd& x0, RunOutcome out = {}) {
    try {
      const MinimizeResult res = minimize(objective_, x0, scheme_.stopping, bounds_);
      if (out.trace.init.ranges.size() == 0)
        out.trace.init = layout_.unpack(x0, reparam_, fixed_noise_);
      out.trace.init_nll = res.f_history.front();
      out.trace.final_nll = res.f;
      out.trace.termination = res.termination;
      out.trace.iterations = res.iterations;
      out.trace.n_evals = res.n_evals;
      out.x = res.x;
    } catch (const Error& e) {
      out.trace.error = e.what();
    }
    return out;
  }

  ParamVector params_at(const Eigen::VectorXd& x) const {
    return layout_.unpack(x, reparam_, fixed_noise_);
  }

 private:
  const SchemeConfig& scheme_;
  const KernelSpec& spec_;
  const Dataset& data_;
  ParamLayout layout_;
  Reparam reparam_;
  LikelihoodOptions options_;
  BoxBounds bounds_;
  double fixed_noise_ = 0.0;
  Objective objective_;
};

std::string failure_summary(const std::vector<RunTrace>& runs) {
  std::ostringstream os;
  os << "fit: all " << runs.size() << " optimization runs failed";
  if (!runs.empty()) os << " (first error: " << runs.front().error << ")";
  return os.str();
}

}  // namespace

FitResult fit(const SchemeConfig& scheme, const KernelSpec& spec, const Dataset& data) {
  const auto t0 = std::chrono::steady_clock::now();
  scheme.validate();
  check_data(spec, data);

  ParamVector init;
  try {
    init = initialize(scheme.init, spec, data, scheme.jitter);
  } catch (const Error& e) {
    throw FitFailed(std::string("fit: initialization failed: ") + e.what());
  }

  SchemeRunner runner(scheme, spec, data);
  runner.set_fixed_noise(init.noise_variance);

  std::vector<RunOutcome> outcomes;
  std::visit(
      overloaded{
          [&](const NoRestart&) { outcomes.push_back(runner.run_from_params(init)); },
          [&](const Restart& r) {
            outcomes.push_back(runner.run_from_params(init));
            if (outcomes.back().trace.failed()) return;
            Eigen::VectorXd best_x = outcomes.back().x;
            double best_f = outcomes.back().trace.final_nll;
            for (int run = 1; run < r.n_opt; ++run) {
              outcomes.push_back(runner.run_from_x(best_x));
              const RunOutcome& o = outcomes.back();
              if (o.trace.failed()) break;
              const double improvement = best_f - o.trace.final_nll;
              if (o.trace.final_nll < best_f) {
                best_f = o.trace.final_nll;
                best_x = o.x;
              }
              if (improvement <= 1e-9 && !r.exhaust_budget) break;
            }
          },
          [&](const MultiStart& m) {
            const double alpha = init.noise_variance / init.variance;
            for (int run = 0; run < m.n_opt; ++run) {
              if (run == 0) {
                outcomes.push_back(runner.run_from_params(init));
                continue;
              }
              std::mt19937_64 rng = run_stream(scheme.seed, static_cast<std::uint64_t>(run));
              const Eigen::VectorXd rho = perturb_ranges(init.ranges, m.sigma_eta, rng);
              try {
                outcomes.push_back(
                    runner.run_from_params(init_profiled(spec, data, rho, alpha, scheme.jitter)));
              } catch (const Error& e) {
                RunOutcome failed;
                failed.trace.init = init;
                failed.trace.init.ranges = rho;
                failed.trace.error = e.what();
                outcomes.push_back(std::move(failed));
              }
            }
          }},
      scheme.restart);

  FitResult result;
  int best = -1;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const RunTrace& t = outcomes[i].trace;
    result.runs.push_back(t);
    result.n_nll_evals += t.n_evals;
    if (t.failed()) continue;
    if (best < 0 || t.final_nll < outcomes[best].trace.final_nll) best = static_cast<int>(i);
  }
  result.n_grad_evals = result.n_nll_evals;
  if (best < 0) throw FitFailed(failure_summary(result.runs));

  // Restart runs continue from the incumbent, so the best run is the last
  // improving one; MultiStart keeps the lowest index among ties.
  result.best_run = best;
  result.params = runner.params_at(outcomes[best].x);
  result.nll = outcomes[best].trace.final_nll;
  result.termination = *outcomes[best].trace.termination;
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace gpmle
