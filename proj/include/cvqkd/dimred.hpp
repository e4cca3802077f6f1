#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "cvqkd/fock.hpp"
#include "cvqkd/protocol.hpp"

namespace cvqkd {

/// h(x) = -x log2 x - (1-x) log2(1-x), with h(0) = h(1) = 0.
double binary_entropy(double x);

struct WeightBound {
  double W = 0.0;
  std::vector<double> per_signal;
};

/// W_i = (<n^2>_i - <n>_i) / (N (N+1)) and W = sum_i p_i W_i: the largest
/// probability mass any state matching the moments can place outside the span
/// of the first N+1 displaced number states.
WeightBound weight_bound_dmcv(const std::vector<double>& exp_n, const std::vector<double>& exp_nsq,
                              const std::vector<double>& p, int cutoff);

/// sqrt(2W - W^2): radius of the trace-norm ball around the projected state.
double trace_norm_radius(double W);

/// Delta(W) = r log2|Z| + (1 + r) h(r / (1 + r)) with r = sqrt(2W - W^2), or 0
/// when every key-map POVM element is block diagonal with respect to the
/// subspace and its complement.
double correction_term(double W, int num_key_symbols, bool block_diagonal = false);

enum class ContinuityVariant { general, cq_two_sided, cq_one_sided };

/// Continuity bounds on the conditional entropy of subnormalized states with
/// trace distance at most eps, half trace difference delta and mean trace a.
double continuity_bound(double eps, double delta, double a, double dim_a, ContinuityVariant variant);

enum class ConstraintKind { observable, trace, reduced_state };

struct Constraint {
  ConstraintKind kind = ConstraintKind::observable;
  std::string label;
  ComplexMatrix op;  // empty for reduced_state
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

/// The expanded finite-dimensional problem over operators on the displaced
/// subspace: minimise f over rho >= 0 subject to
///   Tr[rho (1/p_i)|i><i| (x) n]   <= <n>_i
///   Tr[rho (1/p_i)|i><i| (x) n^2] <= <n^2>_i
///   1 - W <= Tr rho <= 1
///   (1/2) || Tr_B rho - tau_A ||_1 <= sqrt(2W - W^2)
struct FiniteProblem {
  int num_signals = 0;
  int cutoff = 0;
  std::vector<ComplexMatrix> objective_regions;
  std::vector<Constraint> constraints;
  ComplexMatrix tau_a;
  double trace_lower = 1.0;
  double trace_upper = 1.0;
  double radius = 0.0;
  double W = 0.0;
  double delta_correction = 0.0;
  std::shared_ptr<const GramRelation> gram;

  int dim() const { return num_signals * (cutoff + 1); }
  int constraint_count() const { return static_cast<int>(constraints.size()); }

  /// Largest violation of any constraint by rho (0 when feasible).
  double max_violation(const ComplexMatrix& rho) const;
};

FiniteProblem assemble_finite_problem(const OperatorSet& ops, const std::vector<double>& exp_n,
                                      const std::vector<double>& exp_nsq, const ProtocolSpec& spec,
                                      const DisplacedBasis& basis, const WeightBound& weight);

/// (1/2) || X ||_1 for a Hermitian X.
double half_trace_norm(const ComplexMatrix& x);

}  // namespace cvqkd
