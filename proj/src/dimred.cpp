#include "cvqkd/dimred.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cvqkd {

double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

WeightBound weight_bound_dmcv(const std::vector<double>& exp_n, const std::vector<double>& exp_nsq,
                              const std::vector<double>& p, int cutoff) {
  if (cutoff < 1) throw SpecError("weight_bound_dmcv: N must be at least 1");
  if (exp_n.size() != p.size() || exp_nsq.size() != p.size())
    throw DimensionError("weight_bound_dmcv: expectation lists must match the number of signals");
  const double denom = static_cast<double>(cutoff) * (cutoff + 1.0);
  WeightBound wb;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double wi = (exp_nsq[i] - exp_n[i]) / denom;
    if (!(wi >= 0.0) || !(exp_n[i] >= 0.0)) {
      std::ostringstream os;
      os << "inconsistent expectations for signal " << i << ": <n> = " << exp_n[i]
         << ", <n^2> = " << exp_nsq[i];
      throw SpecError(os.str());
    }
    wb.per_signal.push_back(wi);
    wb.W += p[i] * wi;
  }
  return wb;
}

double trace_norm_radius(double W) {
  if (!(W >= 0.0 && W <= 1.0)) throw SpecError("weight W must lie in [0, 1]");
  return std::sqrt(std::max(0.0, 2.0 * W - W * W));
}

double correction_term(double W, int num_key_symbols, bool block_diagonal) {
  const double r = trace_norm_radius(W);
  if (block_diagonal) return 0.0;
  return r * std::log2(static_cast<double>(num_key_symbols)) + (1.0 + r) * binary_entropy(r / (1.0 + r));
}

double continuity_bound(double eps, double delta, double a, double dim_a, ContinuityVariant variant) {
  if (!(delta >= 0.0 && delta <= eps && eps <= 1.0))
    throw SpecError("continuity_bound: requires 0 <= delta <= eps <= 1");
  if (!(a >= delta && a <= 1.0)) throw SpecError("continuity_bound: requires delta <= a <= 1");
  if (!(dim_a >= 1.0)) throw SpecError("continuity_bound: |A| must be at least 1");
  if (eps == 0.0) return 0.0;
  const double e1 = eps + delta;
  const double e2 = eps - delta;
  const double s = a + eps;
  const double lg = std::log2(dim_a);
  const double hmax = std::max(binary_entropy(e1 / s), binary_entropy(e2 / s));
  switch (variant) {
    case ContinuityVariant::general:
      return 2.0 * eps * lg + s * hmax;
    case ContinuityVariant::cq_two_sided:
      return e1 * lg + s * hmax;
    case ContinuityVariant::cq_one_sided:
      return e2 * lg + s * binary_entropy(e2 / s);
  }
  return 0.0;
}

double half_trace_norm(const ComplexMatrix& x) {
  const auto es = eigh(hermitian_part(x));
  return 0.5 * es.values.cwiseAbs().sum();
}

double FiniteProblem::max_violation(const ComplexMatrix& rho) const {
  if (rho.rows() != dim() || rho.cols() != dim())
    throw DimensionError("max_violation: state has wrong dimension");
  double worst = 0.0;
  for (const auto& c : constraints) {
    double v = 0.0;
    switch (c.kind) {
      case ConstraintKind::observable:
      case ConstraintKind::trace:
        v = real_inner(c.op, rho);
        break;
      case ConstraintKind::reduced_state:
        v = half_trace_norm(partial_trace_displaced(rho, *gram) - tau_a);
        break;
    }
    worst = std::max({worst, v - c.upper, c.lower - v});
  }
  return worst;
}

FiniteProblem assemble_finite_problem(const OperatorSet& ops, const std::vector<double>& exp_n,
                                      const std::vector<double>& exp_nsq, const ProtocolSpec& spec,
                                      const DisplacedBasis& basis, const WeightBound& weight) {
  spec.validate();
  const int d = basis.num_signals();
  if (spec.num_signals() != d || static_cast<int>(exp_n.size()) != d ||
      static_cast<int>(exp_nsq.size()) != d || static_cast<int>(weight.per_signal.size()) != d)
    throw DimensionError("assemble_finite_problem: inconsistent number of signals");
  if (static_cast<int>(ops.observables.n_obs.size()) != d || ops.regions.size() != kNumKeySymbols)
    throw DimensionError("assemble_finite_problem: operator set does not match basis");
  for (const auto& r : ops.regions)
    if (r.rows() != basis.dim()) throw DimensionError("assemble_finite_problem: region size");
  for (int i = 0; i < d; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (exp_nsq[k] < exp_n[k]) {
      std::ostringstream os;
      os << "signal " << i << ": <n^2> = " << exp_nsq[k] << " is below <n> = " << exp_n[k];
      throw SpecError(os.str());
    }
    if (spec.p[k] <= 0.0) throw SpecError("assemble_finite_problem: signal with zero probability");
  }

  FiniteProblem fp;
  fp.num_signals = d;
  fp.cutoff = basis.cutoff();
  fp.objective_regions = ops.regions;
  fp.tau_a = ops.tau_a;
  fp.W = weight.W;
  fp.trace_lower = 1.0 - weight.W;
  fp.trace_upper = 1.0;
  fp.radius = trace_norm_radius(weight.W);
  fp.delta_correction = correction_term(weight.W, kNumKeySymbols);
  fp.gram = std::make_shared<const GramRelation>(build_gram_relation(basis));

  for (int i = 0; i < d; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double inv_p = 1.0 / spec.p[k];
    fp.constraints.push_back({ConstraintKind::observable, "n_" + std::to_string(i),
                              inv_p * ops.observables.n_obs[k],
                              -std::numeric_limits<double>::infinity(), exp_n[k]});
    fp.constraints.push_back({ConstraintKind::observable, "nsq_" + std::to_string(i),
                              inv_p * ops.observables.nsq_obs[k],
                              -std::numeric_limits<double>::infinity(), exp_nsq[k]});
  }
  fp.constraints.push_back({ConstraintKind::trace, "trace",
                            ComplexMatrix::Identity(basis.dim(), basis.dim()), fp.trace_lower,
                            fp.trace_upper});
  fp.constraints.push_back({ConstraintKind::reduced_state, "reduced_state", ComplexMatrix(), 0.0,
                            fp.radius});
  return fp;
}

}  // namespace cvqkd
