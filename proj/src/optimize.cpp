#include "gpmle/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "gpmle/errors.hpp"

namespace gpmle {

void StoppingRule::validate() const {
  if (maxiter < 1 || !(factr > 0.0) || !(pgtol > 0.0))
    throw ContractViolation("StoppingRule: maxiter, factr and pgtol must be positive");
}

BoxBounds BoxBounds::unbounded(Eigen::Index n) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Eigen::VectorXd::Constant(n, -inf), Eigen::VectorXd::Constant(n, inf)};
}

bool BoxBounds::contains(const Eigen::VectorXd& x) const {
  if (lower.size() == x.size() && (x.array() < lower.array()).any()) return false;
  if (upper.size() == x.size() && (x.array() > upper.array()).any()) return false;
  return true;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::PgTol:
      return "pgtol";
    case Termination::Factr:
      return "factr";
    case Termination::MaxIter:
      return "maxiter";
    case Termination::LineSearchFailure:
      return "line_search_failure";
  }
  return "unknown";
}

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                               const BoxBounds& bounds) {
  const bool has_lower = bounds.lower.size() == x.size();
  const bool has_upper = bounds.upper.size() == x.size();
  double norm = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double gi = grad[i];
    if (gi < 0.0) {
      if (has_upper && std::isfinite(bounds.upper[i])) gi = std::max(x[i] - bounds.upper[i], gi);
    } else if (has_lower && std::isfinite(bounds.lower[i])) {
      gi = std::min(x[i] - bounds.lower[i], gi);
    }
    norm = std::max(norm, std::abs(gi));
  }
  return norm;
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Correction {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

struct Trial {
  double alpha = 0.0;
  double f = 0.0;
  double dphi = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd grad;
  bool finite = true;
};

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db).
double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  return b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
}

class Minimizer {
 public:
  Minimizer(const Objective& objective, const StoppingRule& stopping, BoxBounds bounds,
            const MinimizeOptions& options)
      : objective_(objective), stopping_(stopping), bounds_(std::move(bounds)),
        options_(options) {}

  MinimizeResult run(const Eigen::VectorXd& x0) {
    MinimizeResult result;
    x_ = x0;
    grad_.resize(x_.size());
    f_ = eval(x_, grad_);
    if (!std::isfinite(f_)) throw NonFiniteObjective("minimize: objective is not finite at start");
    result.f_history.push_back(f_);

    int iter = 0;
    Termination term = Termination::MaxIter;
    if (projected_gradient_norm(x_, grad_, bounds_) <= stopping_.pgtol) {
      term = Termination::PgTol;
    } else {
      while (true) {
        Trial accepted;
        if (!line_search_step(iter, accepted)) {
          term = Termination::LineSearchFailure;
          break;
        }
        ++iter;
        update_memory(accepted);
        const double f_old = f_;
        x_ = accepted.x;
        grad_ = accepted.grad;
        f_ = accepted.f;
        result.f_history.push_back(f_);

        if (projected_gradient_norm(x_, grad_, bounds_) <= stopping_.pgtol) {
          term = Termination::PgTol;
          break;
        }
        if (f_old - f_ <= stopping_.factr * kEps * std::max({std::abs(f_old), std::abs(f_), 1.0})) {
          term = Termination::Factr;
          break;
        }
        if (iter >= stopping_.maxiter) {
          term = Termination::MaxIter;
          break;
        }
      }
    }
    result.x = x_;
    result.f = f_;
    result.grad = grad_;
    result.termination = term;
    result.iterations = iter;
    result.n_evals = n_evals_;
    return result;
  }

 private:
  double eval(const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    ++n_evals_;
    grad.resize(x.size());
    const double f = objective_(x, grad);
    if (!std::isfinite(f) || !grad.allFinite()) return std::numeric_limits<double>::infinity();
    return f;
  }

  Eigen::ArrayXd free_mask() const {
    Eigen::ArrayXd mask = Eigen::ArrayXd::Ones(x_.size());
    for (Eigen::Index i = 0; i < x_.size(); ++i) {
      if ((x_[i] <= bounds_.lower[i] && grad_[i] > 0.0) ||
          (x_[i] >= bounds_.upper[i] && grad_[i] < 0.0))
        mask[i] = 0.0;
    }
    return mask;
  }

  Eigen::VectorXd direction(const Eigen::ArrayXd& mask) const {
    Eigen::VectorXd q = (grad_.array() * mask).matrix();
    std::vector<double> alphas(memory_.size());
    for (std::size_t j = memory_.size(); j-- > 0;) {
      alphas[j] = memory_[j].rho * memory_[j].s.dot(q);
      q -= alphas[j] * memory_[j].y;
    }
    if (!memory_.empty()) {
      const Correction& last = memory_.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t j = 0; j < memory_.size(); ++j) {
      const double beta = memory_[j].rho * memory_[j].y.dot(q);
      q += (alphas[j] - beta) * memory_[j].s;
    }
    Eigen::VectorXd d = -(q.array() * mask).matrix();
    // Components pushing a variable already at a bound further out are dropped.
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if ((x_[i] <= bounds_.lower[i] && d[i] < 0.0) || (x_[i] >= bounds_.upper[i] && d[i] > 0.0))
        d[i] = 0.0;
    }
    return d;
  }

  double max_step(const Eigen::VectorXd& d) const {
    double amax = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (d[i] < 0.0 && std::isfinite(bounds_.lower[i]))
        amax = std::min(amax, (bounds_.lower[i] - x_[i]) / d[i]);
      else if (d[i] > 0.0 && std::isfinite(bounds_.upper[i]))
        amax = std::min(amax, (bounds_.upper[i] - x_[i]) / d[i]);
    }
    return std::max(amax, 0.0);
  }

  Trial evaluate_trial(const Eigen::VectorXd& d, double alpha, double amax) {
    Trial t;
    t.alpha = alpha;
    t.x = x_ + alpha * d;
    if (alpha >= amax) {
      // Land exactly on the blocking bound.
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d[i] < 0.0 && std::isfinite(bounds_.lower[i]) &&
            (bounds_.lower[i] - x_[i]) / d[i] <= amax)
          t.x[i] = bounds_.lower[i];
        else if (d[i] > 0.0 && std::isfinite(bounds_.upper[i]) &&
                 (bounds_.upper[i] - x_[i]) / d[i] <= amax)
          t.x[i] = bounds_.upper[i];
      }
    }
    t.x = t.x.cwiseMax(bounds_.lower).cwiseMin(bounds_.upper);
    t.f = eval(t.x, t.grad);
    t.finite = std::isfinite(t.f);
    t.dphi = t.finite ? t.grad.dot(d) : std::numeric_limits<double>::quiet_NaN();
    return t;
  }

  bool line_search_step(int iter, Trial& accepted) {
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::ArrayXd mask = free_mask();
      Eigen::VectorXd d = direction(mask);
      double dphi0 = grad_.dot(d);
      if (!(dphi0 < 0.0)) {
        memory_.clear();
        d = direction(mask);
        dphi0 = grad_.dot(d);
        if (!(dphi0 < 0.0)) return false;
      }
      const double amax = max_step(d);
      if (!(amax > 0.0)) return false;
      double alpha0 = (iter == 0 || memory_.empty()) ? 1.0 / d.norm() : 1.0;
      alpha0 = std::min({alpha0, 1.0, amax});
      if (strong_wolfe(d, dphi0, alpha0, amax, accepted)) return true;
      if (memory_.empty()) return false;
      memory_.clear();
    }
    return false;
  }

  bool armijo(const Trial& t, double dphi0) const {
    return t.finite && t.f <= f_ + options_.c1 * t.alpha * dphi0;
  }

  bool strong_wolfe(const Eigen::VectorXd& d, double dphi0, double alpha0, double amax,
                    Trial& accepted) {
    const double curvature = -options_.c2 * dphi0;
    Trial prev;
    prev.alpha = 0.0;
    prev.f = f_;
    prev.dphi = dphi0;
    prev.x = x_;
    prev.grad = grad_;

    Trial lo;
    Trial hi;
    bool bracketed = false;
    double alpha = alpha0;
    int trials = 0;
    while (trials < options_.max_line_search) {
      ++trials;
      Trial t = evaluate_trial(d, alpha, amax);
      if (!armijo(t, dphi0) || (trials > 1 && t.f >= prev.f)) {
        lo = prev;
        hi = t;
        bracketed = true;
        break;
      }
      if (std::abs(t.dphi) <= curvature) {
        accepted = std::move(t);
        return true;
      }
      if (t.dphi >= 0.0) {
        lo = t;
        hi = prev;
        bracketed = true;
        break;
      }
      if (alpha >= amax) {
        accepted = std::move(t);
        return true;
      }
      prev = std::move(t);
      alpha = std::min(4.0 * alpha, amax);
    }
    if (!bracketed) {
      if (prev.alpha > 0.0) {
        accepted = std::move(prev);
        return true;
      }
      return false;
    }

    while (trials < options_.max_line_search) {
      ++trials;
      const double a = std::min(lo.alpha, hi.alpha);
      const double b = std::max(lo.alpha, hi.alpha);
      const double width = b - a;
      if (width <= kEps * std::max(1.0, b)) break;
      double trial_alpha = std::numeric_limits<double>::quiet_NaN();
      if (hi.finite)
        trial_alpha = cubic_minimizer(lo.alpha, lo.f, lo.dphi, hi.alpha, hi.f, hi.dphi);
      if (!std::isfinite(trial_alpha) || trial_alpha < a + 0.1 * width ||
          trial_alpha > b - 0.1 * width)
        trial_alpha = 0.5 * (a + b);
      Trial t = evaluate_trial(d, trial_alpha, amax);
      if (!armijo(t, dphi0) || t.f >= lo.f) {
        hi = std::move(t);
        continue;
      }
      if (std::abs(t.dphi) <= curvature) {
        accepted = std::move(t);
        return true;
      }
      if (t.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(t);
    }
    // Budget spent: keep the best point with sufficient decrease, if any.
    if (lo.alpha > 0.0 && lo.f < f_) {
      accepted = std::move(lo);
      return true;
    }
    return false;
  }

  void update_memory(const Trial& accepted) {
    Eigen::VectorXd s = accepted.x - x_;
    Eigen::VectorXd y = accepted.grad - grad_;
    const double sy = s.dot(y);
    if (!(sy > kEps * y.squaredNorm())) return;
    memory_.push_back({std::move(s), std::move(y), 1.0 / sy});
    if (static_cast<int>(memory_.size()) > options_.memory) memory_.pop_front();
  }

  const Objective& objective_;
  StoppingRule stopping_;
  BoxBounds bounds_;
  MinimizeOptions options_;

  Eigen::VectorXd x_;
  Eigen::VectorXd grad_;
  double f_ = 0.0;
  int n_evals_ = 0;
  std::deque<Correction> memory_;
};

}  // namespace

MinimizeResult minimize(const Objective& objective, const Eigen::VectorXd& x0,
                        const StoppingRule& stopping, const BoxBounds& bounds,
                        const MinimizeOptions& options) {
  stopping.validate();
  if (options.memory < 1 || options.max_line_search < 1)
    throw ContractViolation("minimize: invalid options");
  BoxBounds box = BoxBounds::unbounded(x0.size());
  if (bounds.lower.size() == x0.size()) box.lower = bounds.lower;
  else if (bounds.lower.size() != 0) throw ContractViolation("minimize: lower bound size mismatch");
  if (bounds.upper.size() == x0.size()) box.upper = bounds.upper;
  else if (bounds.upper.size() != 0) throw ContractViolation("minimize: upper bound size mismatch");
  if ((box.lower.array() > box.upper.array()).any())
    throw ContractViolation("minimize: lower bound exceeds upper bound");
  if (!box.contains(x0)) throw ContractViolation("minimize: start point outside the box");

  Minimizer minimizer(objective, stopping, std::move(box), options);
  return minimizer.run(x0);
}

}  // namespace gpmle
