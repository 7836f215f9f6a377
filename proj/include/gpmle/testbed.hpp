#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpmle/kernel.hpp"

namespace gpmle {

/// Axis-aligned box.
struct Domain {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Affine image of a point of [0, 1]^d.
  Eigen::VectorXd from_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const;
};

struct TestFunction {
  std::string name;
  Domain domain;
  std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)> f;

  int dim() const { return domain.dim(); }
};

double branin(const Eigen::Ref<const Eigen::VectorXd>& x);
/// Inputs ordered (r_w, r, T_u, H_u, T_l, H_l, L, K_w).
double borehole(const Eigen::Ref<const Eigen::VectorXd>& x);
/// Fabrication cost; inputs ordered (h, l, t, b).
double welded_beam(const Eigen::Ref<const Eigen::VectorXd>& x);
/// Objective only; the constraints are not part of the interpolation target.
double g10(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Every registered name, including the ones without a closed form yet.
const std::vector<std::string>& function_names();
bool function_available(const std::string& name);
/// Throws NotAvailable for registered names without a closed form and
/// ContractViolation for unknown names.
const TestFunction& get_function(const std::string& name);

/// Throws OutOfDomain when x lies outside the function's domain.
double evaluate(const TestFunction& fn, const Eigen::Ref<const Eigen::VectorXd>& x);

enum class DesignKind { LhsMdu, UniformRandom };

std::string design_name(DesignKind kind);
DesignKind parse_design_kind(const std::string& name);

struct DesignSpec {
  DesignKind kind = DesignKind::LhsMdu;
  int n = 1;
  std::uint64_t seed = 0;
  int candidates = 200;  // Latin hypercubes drawn for the maximin selection

  void validate() const;
};

/// Random Latin hypercube on [0, 1]^d.
Eigen::MatrixXd random_lhs(int n, int d, std::uint64_t seed);

/// Smallest pairwise Euclidean distance between rows (infinity if n < 2).
double min_pairwise_distance(const Eigen::MatrixXd& X);

/// Design on [0, 1]^d. LhsMdu keeps the candidate Latin hypercube with the
/// largest minimum pairwise distance; candidate 0 is random_lhs(n, d, seed).
Eigen::MatrixXd generate_unit_design(const DesignSpec& spec, int d);

Eigen::MatrixXd generate_design(const DesignSpec& spec, const Domain& domain);

Dataset make_dataset(const TestFunction& fn, const DesignSpec& spec);

struct CorpusEntry {
  std::string function;
  int multiplier = 3;  // n = multiplier * d
  int n = 0;
  bool available = false;

  /// e.g. "borehole_5d".
  std::string id() const;
};

inline const std::vector<int>& corpus_multipliers() {
  static const std::vector<int> m = {3, 5, 10, 20};
  return m;
}

/// All function x size combinations, available or not.
std::vector<CorpusEntry> corpus_plan();
/// The entries that can actually be generated.
std::vector<CorpusEntry> available_corpus();
const CorpusEntry& corpus_entry(const std::string& id);

/// LhsMdu dataset for a corpus entry. The design seed is derived from the
/// entry id and `data_seed`.
Dataset make_corpus_dataset(const CorpusEntry& entry, std::uint64_t data_seed = 0);

/// CSV with '#'-prefixed metadata lines, a header x_1..x_d,z and one row
/// per point.
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

}  // namespace gpmle
