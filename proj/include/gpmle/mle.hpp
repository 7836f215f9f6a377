#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gpmle/kernel.hpp"
#include "gpmle/likelihood.hpp"
#include "gpmle/linalg.hpp"
#include "gpmle/optimize.hpp"

namespace gpmle {

// ---- initialization strategies ----

/// mu = 0, sigma^2 = 1, rho_k = 1 regardless of the data.
struct ConstantInit {};

/// Empirical moments: mean and population variance of z, population
/// standard deviation of every input coordinate for the ranges.
struct MomentInit {};

/// Moment-based ranges, then GLS mean and variance with noise ratio alpha.
struct ProfiledInit {
  double alpha = 0.0;
};

/// Profiled initialization over L range vectors {a_1 rho_0, ..., a_L rho_0},
/// a_i log-spaced in [alpha_min, alpha_max], with
/// rho_0,k = sqrt(d) (max_i x_ik - min_i x_ik).
struct GridSearchInit {
  int levels = 5;
  double alpha_min = 1.0 / 50.0;
  double alpha_max = 2.0;
  double noise_ratio = 0.0;
};

using InitStrategy = std::variant<ConstantInit, MomentInit, ProfiledInit, GridSearchInit>;

std::string init_name(const InitStrategy& init);

ParamVector init_constant(const Dataset& data);

/// Throws DegenerateDesign when an input coordinate is constant and
/// ConstantData when z is constant.
ParamVector init_moment_based(const Dataset& data);

/// Ranges from the moment rule unless given; (mu, sigma^2) from GLS
/// profiling; sigma_eps^2 = alpha sigma^2.
ParamVector init_profiled(const KernelSpec& spec, const Dataset& data,
                          const std::optional<Eigen::VectorXd>& ranges, double alpha,
                          const JitterOptions& jitter = {});

Eigen::VectorXd nominal_ranges(const Dataset& data);
std::vector<double> grid_multipliers(int levels, double alpha_min, double alpha_max);

/// Argmin of the profiled NLL over the grid (plus any extra candidate range
/// vectors). Throws InitFailed if no candidate can be profiled.
ParamVector init_grid_search(const KernelSpec& spec, const Dataset& data,
                             const GridSearchInit& grid, const JitterOptions& jitter = {},
                             const std::vector<Eigen::VectorXd>& extra_candidates = {});

ParamVector initialize(const InitStrategy& init, const KernelSpec& spec, const Dataset& data,
                       const JitterOptions& jitter = {});

// ---- restart policies ----

/// log10(5) / 1.96: about 95% of the factors 10^eta fall in [1/5, 5].
double default_sigma_eta();

struct NoRestart {};

/// Relaunch from the incumbent with fresh quasi-Newton memory while the NLL
/// improves by more than 1e-9, for at most n_opt runs in total.
struct Restart {
  int n_opt = 5;
  bool exhaust_budget = false;
};

/// Run 0 starts at the initialization; runs 1..n_opt-1 start from
/// rho_init * 10^eta, eta ~ N(0, sigma_eta^2) per coordinate, re-profiled.
struct MultiStart {
  int n_opt = 20;
  double sigma_eta = default_sigma_eta();
};

using RestartPolicy = std::variant<NoRestart, Restart, MultiStart>;

/// rho * 10^eta with eta ~ N(0, sigma_eta^2) i.i.d. per coordinate.
Eigen::VectorXd perturb_ranges(const Eigen::VectorXd& ranges, double sigma_eta,
                               std::mt19937_64& rng);

/// Independent stream for (seed, run index).
std::mt19937_64 run_stream(std::uint64_t seed, std::uint64_t run_index);

// ---- schemes ----

enum class ReparamChoice { Log, InvSoftplus, InvSoftplusStandardized };

std::string reparam_name(ReparamChoice choice);

/// InvSoftplus uses s = 1 everywhere; the standardized variant sets the
/// range scales to the population standard deviation of each input column.
Reparam make_reparam(ReparamChoice choice, const Dataset& data, bool estimate_noise);

struct SchemeConfig {
  std::string id;
  InitStrategy init = GridSearchInit{};
  ReparamChoice reparam = ReparamChoice::Log;
  StoppingRule stopping = StoppingRule::soft();
  RestartPolicy restart = NoRestart{};
  BoxBounds bounds;
  std::uint64_t seed = 0;
  bool estimate_noise = false;
  JitterOptions jitter;

  /// log reparam, grid-search init, soft stopping, Restart(5).
  static SchemeConfig improved();
  /// invsoftplus (s = 1), constant init, soft stopping, no restart.
  static SchemeConfig default_preset();
  /// MultiStart(50) with grid-search init, log reparam, strict stopping.
  static SchemeConfig reference(int n_opt = 50);

  bool stochastic() const { return std::holds_alternative<MultiStart>(restart); }
  void validate() const;
};

struct RunTrace {
  ParamVector init;
  double init_nll = 0.0;
  double final_nll = 0.0;
  std::optional<Termination> termination;
  int iterations = 0;
  int n_evals = 0;
  std::string error;  // non-empty when the run failed

  bool failed() const { return !error.empty(); }
};

struct FitResult {
  ParamVector params;
  double nll = 0.0;
  Termination termination = Termination::MaxIter;
  int best_run = 0;
  int n_nll_evals = 0;
  int n_grad_evals = 0;
  double wall_time = 0.0;
  std::vector<RunTrace> runs;
};

/// Runs the scheme. Throws FitFailed when every optimization run failed.
FitResult fit(const SchemeConfig& scheme, const KernelSpec& spec, const Dataset& data);

}  // namespace gpmle
