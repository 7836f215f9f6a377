#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gpmle {

/// Stopping rule in the usual L-BFGS-B vocabulary.
struct StoppingRule {
  int maxiter = 1000;
  double factr = 1e7;   // relative decrease threshold, in units of machine epsilon
  double pgtol = 1e-5;  // max-norm of the projected gradient

  static StoppingRule soft() { return {1000, 1e7, 1e-5}; }
  static StoppingRule strict() { return {1000, 10.0, 1e-20}; }
  void validate() const;
};

/// Box in the optimizer's coordinates; empty vectors mean unbounded.
struct BoxBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static BoxBounds unbounded(Eigen::Index n);
  bool contains(const Eigen::VectorXd& x) const;
};

enum class Termination { PgTol, Factr, MaxIter, LineSearchFailure };

std::string to_string(Termination t);

/// Objective returning f(x) and writing the gradient into `grad`. A
/// non-finite return value marks x as infeasible (step is shortened).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct MinimizeOptions {
  int memory = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 20;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  Termination termination = Termination::MaxIter;
  int iterations = 0;
  int n_evals = 0;
  std::vector<double> f_history;  // accepted values, starting with f(x0)
};

/// Max-norm of the projected gradient on the box.
double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                               const BoxBounds& bounds);

/// Limited-memory BFGS with projected-gradient active-set identification
/// and a strong-Wolfe line search restricted to the box. Throws
/// NonFiniteObjective if f(x0) is not finite.
MinimizeResult minimize(const Objective& objective, const Eigen::VectorXd& x0,
                        const StoppingRule& stopping, const BoxBounds& bounds = {},
                        const MinimizeOptions& options = {});

}  // namespace gpmle
