#include "cvqkd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <numbers>
#include <sstream>

namespace cvqkd {

void SolverConfig::validate() const {
  if (max_fw_iterations < 1) throw SpecError("solver: max_fw_iterations must be at least 1");
  if (!(fw_gap_tol > 0.0) || !(eig_floor > 0.0) || !(eps_rep > 0.0) || !(conic_tol > 0.0))
    throw SpecError("solver: all tolerances must be positive");
}

Objective::Objective(std::vector<ComplexMatrix> regions, double eig_floor) : floor_(eig_floor) {
  if (regions.empty()) throw DimensionError("Objective: no key-map operators");
  const auto n = regions.front().rows();
  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  for (const auto& r : regions) {
    if (r.rows() != n || r.cols() != n) throw DimensionError("Objective: key-map operators differ in size");
    const ComplexMatrix h = hermitian_part(r);
    sqrt_pz_.push_back(sqrtm_psd(h));
    p += h;
  }
  sqrt_p_ = sqrtm_psd(p);
}

ComplexMatrix Objective::checked(const ComplexMatrix& rho) const {
  if (rho.rows() != sqrt_p_.rows() || rho.cols() != sqrt_p_.cols())
    throw DimensionError("objective: state does not match the operator dimension");
  if (!rho.allFinite()) throw NumericalError("objective: state has non-finite entries");
  ComplexMatrix h = enforce_hermitian(rho, 1e-8);
  const double lmin = min_eigenvalue(h);
  if (lmin < -1e-9) {
    std::ostringstream os;
    os << "objective: state is not PSD (min eigenvalue " << lmin << ")";
    throw NumericalError(os.str());
  }
  return h;
}

double Objective::value(const ComplexMatrix& rho) const {
  const ComplexMatrix r = checked(rho);
  double v = trace_xlogx_bits(eigh(hermitian_part(sqrt_p_ * r * sqrt_p_)).values, floor_);
  for (const auto& s : sqrt_pz_) v -= trace_xlogx_bits(eigh(hermitian_part(s * r * s)).values, floor_);
  if (!std::isfinite(v)) throw NumericalError("objective: non-finite value");
  return v;
}

ComplexMatrix Objective::gradient(const ComplexMatrix& rho) const {
  const ComplexMatrix r = checked(rho);
  ComplexMatrix g = sqrt_p_ * logm_floored(hermitian_part(sqrt_p_ * r * sqrt_p_), floor_) * sqrt_p_;
  for (const auto& s : sqrt_pz_) g -= s * logm_floored(hermitian_part(s * r * s), floor_) * s;
  g /= std::numbers::ln2;
  if (!g.allFinite()) throw NumericalError("objective: non-finite gradient");
  return hermitian_part(g);
}

double objective_value(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& regions, double eig_floor) {
  return Objective(regions, eig_floor).value(rho);
}

ComplexMatrix objective_gradient(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& regions,
                                 double eig_floor) {
  return Objective(regions, eig_floor).gradient(rho);
}

namespace {

struct ScalarInequality {
  std::string label;
  ComplexMatrix op;  // Tr(op rho) <= rhs
  double rhs;
};

// Every finite scalar bound of the problem as an upper bound, in constraint order.
std::vector<ScalarInequality> scalar_inequalities(const FiniteProblem& fp) {
  std::vector<ScalarInequality> out;
  for (const auto& c : fp.constraints) {
    if (c.kind == ConstraintKind::reduced_state) continue;
    const bool trace = c.kind == ConstraintKind::trace;
    if (std::isfinite(c.upper)) out.push_back({c.label + (trace ? "_upper" : ""), c.op, c.upper});
    if (std::isfinite(c.lower)) out.push_back({c.label + "_lower", -c.op, -c.lower});
  }
  return out;
}

// a >= b as operators; the diagonal test rejects most pairs cheaply.
bool dominates(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (((a - b).diagonal().real().array() < 0.0).any()) return false;
  return min_eigenvalue(hermitian_part(a - b)) >= -1e-12;
}

// Observable upper bounds Tr(B rho) <= u_B that follow from a kept bound
// Tr(A rho) <= u_A with A >= B and u_A <= u_B (as <n> from <n^2> at W = 0).
std::vector<bool> implied_observable_uppers(const FiniteProblem& fp) {
  const auto& cs = fp.constraints;
  std::vector<bool> out(cs.size(), false);
  auto candidate = [&](std::size_t j) {
    return cs[j].kind == ConstraintKind::observable && std::isfinite(cs[j].upper);
  };
  for (std::size_t j = 0; j < cs.size(); ++j) {
    if (!candidate(j)) continue;
    for (std::size_t a = 0; a < cs.size() && !out[j]; ++a)
      if (a != j && candidate(a) && !out[a] && cs[a].upper <= cs[j].upper && dominates(cs[a].op, cs[j].op))
        out[j] = true;
  }
  return out;
}

// CVQKD_IPM_TRACE in the environment turns on per-iteration solver output.
ConicOptions conic_options(const SolverConfig& config) {
  return {config.conic_tol, 100, std::getenv("CVQKD_IPM_TRACE") != nullptr};
}

std::vector<ComplexMatrix> hermitian_basis(int d) {
  std::vector<ComplexMatrix> out;
  const double s = 1.0 / std::sqrt(2.0);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      ComplexMatrix e = ComplexMatrix::Zero(d, d);
      if (a == b) {
        e(a, a) = 1.0;
        out.push_back(e);
        continue;
      }
      e(a, b) = s;
      e(b, a) = s;
      out.push_back(e);
      ComplexMatrix f = ComplexMatrix::Zero(d, d);
      f(a, b) = cplx(0.0, s);
      f(b, a) = cplx(0.0, -s);
      out.push_back(f);
    }
  return out;
}

ComplexMatrix clip_psd(const ComplexMatrix& h) {
  return apply_spectral(hermitian_part(h), [](double x) { return std::max(x, 0.0); });
}

ComplexMatrix dual_residual(const FiniteProblem& fp, const ComplexMatrix& gradient,
                            const std::vector<ScalarInequality>& ineq, const RealVector& y,
                            const ComplexMatrix& y1, const ComplexMatrix& y2) {
  ComplexMatrix r = gradient + embed_operator_A(y1 - y2, *fp.gram);
  for (std::size_t j = 0; j < ineq.size(); ++j) r += y(static_cast<Eigen::Index>(j)) * ineq[j].op;
  return hermitian_part(r);
}

}  // namespace

LinearEncoding encode_linear_problem(const FiniteProblem& fp, const ComplexMatrix& cost, double eps,
                                     double eps_prime) {
  const int d = fp.num_signals;
  const int dim = fp.dim();
  const int tile = fp.cutoff + 1;
  if (cost.rows() != dim || cost.cols() != dim) throw DimensionError("encode_linear_problem: cost size");
  if (!fp.gram) throw DimensionError("encode_linear_problem: problem has no Gram relation");

  LinearEncoding enc;
  ConicProblem& p = enc.problem;
  p.block_sizes = {dim, d, d};
  p.c_blocks = {hermitian_part(cost), ComplexMatrix::Zero(d, d), ComplexMatrix::Zero(d, d)};
  int lp = 0;
  auto dual_of = [&](const std::string& label, std::vector<std::pair<int, double>> combo) {
    enc.inequality_labels.push_back(label);
    enc.inequality_duals.push_back(std::move(combo));
  };

  const double tr_tau = fp.tau_a.trace().real();
  const double ball = 2.0 * fp.radius + eps_prime;
  const std::vector<bool> implied = implied_observable_uppers(fp);
  for (std::size_t j = 0; j < fp.constraints.size(); ++j) {
    const Constraint& c = fp.constraints[j];
    if (c.kind == ConstraintKind::reduced_state) continue;
    const auto patches = tile_patches(c.op, tile);
    const bool trace = c.kind == ConstraintKind::trace;
    const std::string up = c.label + (trace ? "_upper" : "");
    // Bounds implied by the ball (trace), by rho >= 0 (PSD observables) or by
    // another observable bound are left out: keeping them gives the dual a
    // nearly free direction along which the conic solver stalls. Dropping a
    // bound only relaxes the primal, and its multiplier in the certificate is
    // zero.
    bool has_up = std::isfinite(c.upper), has_lo = std::isfinite(c.lower);
    if (trace) {
      if (c.upper + eps >= tr_tau + ball - 1e-14) has_up = false;
      if (c.lower - eps <= tr_tau - ball + 1e-14) has_lo = false;
    } else {
      if (implied[j]) has_up = false;
      if (has_lo && c.lower - eps <= 0.0 && min_eigenvalue(c.op) >= 0.0) has_lo = false;
    }
    if (!has_up && std::isfinite(c.upper)) dual_of(up, {});
    if (has_up && has_lo) {
      const int r1 = p.num_rows(), s_lo = lp++, s_hi = lp++;
      p.rows.push_back({{{0, patches}}, {{s_lo, -1.0}}, c.lower - eps});
      p.rows.push_back({{}, {{s_lo, 1.0}, {s_hi, 1.0}}, c.upper - c.lower + 2.0 * eps});
      dual_of(up, {{r1 + 1, -1.0}});
      dual_of(c.label + "_lower", {{r1, 1.0}, {r1 + 1, -1.0}});
    } else if (has_up) {
      dual_of(up, {{p.num_rows(), -1.0}});
      p.rows.push_back({{{0, patches}}, {{lp++, 1.0}}, c.upper + eps});
    } else if (has_lo) {
      dual_of(c.label + "_lower", {{p.num_rows(), 1.0}});
      p.rows.push_back({{{0, patches}}, {{lp++, -1.0}}, c.lower - eps});
    }
    if (!has_lo && std::isfinite(c.lower)) dual_of(c.label + "_lower", {});
  }

  enc.hermitian_basis = hermitian_basis(d);
  enc.reduced_row = p.num_rows();
  for (const auto& e : enc.hermitian_basis) {
    p.rows.push_back({{{0, tile_patches(embed_operator_A(e, *fp.gram), tile)}, {1, {{0, 0, -e}}}, {2, {{0, 0, e}}}},
                      {},
                      real_inner(e, fp.tau_a)});
  }
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  enc.radius_row = p.num_rows();
  p.rows.push_back({{{1, {{0, 0, id}}}, {2, {{0, 0, id}}}}, {{lp++, 1.0}}, 2.0 * fp.radius + eps_prime});
  p.lp_size = lp;
  p.c_lp = RealVector::Zero(lp);
  return enc;
}

namespace {

ConicSolution solve_checked(const ConicSolverAdapter& adapter, const ConicProblem& p, const SolverConfig& cfg,
                            const char* what) {
  ConicSolution s = adapter.submit(p, conic_options(cfg));
  // Step 1 only needs a good descent vertex: near-optimal answers are usable.
  if (!s.optimal() && (std::max(s.primal_residual, s.dual_residual) > 1e-6 || s.relative_gap > 1e-4)) {
    std::ostringstream os;
    os << what << ": conic solver returned " << status_name(s.status) << " (primal " << s.primal_residual
       << ", dual " << s.dual_residual << ", gap " << s.relative_gap << ")";
    throw SolverFailure(os.str());
  }
  return s;
}

// Golden-section minimisation of a convex scalar function on [0, 1].
template <class F>
std::pair<double, double> golden_section(F&& phi, double width) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - g * (b - a), e = a + g * (b - a);
  double fc = phi(c), fe = phi(e);
  while (b - a > width) {
    if (fc <= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - g * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + g * (b - a);
      fe = phi(e);
    }
  }
  double t = fc <= fe ? c : e, ft = std::min(fc, fe);
  const double f1 = phi(1.0);
  if (f1 < ft) {
    t = 1.0;
    ft = f1;
  }
  return {t, ft};
}

}  // namespace

FwResult frank_wolfe(const FiniteProblem& fp, const SolverConfig& config, const ConicSolverAdapter& adapter) {
  config.validate();
  const Objective obj(fp.objective_regions, config.eig_floor);
  const int dim = fp.dim();

  // Zero-cost solve: the interior-point path ends near the analytic centre.
  const LinearEncoding start = encode_linear_problem(fp, ComplexMatrix::Zero(dim, dim), config.eps_rep, config.eps_rep);
  const ConicSolution s0 = adapter.submit(start.problem, conic_options(config));
  if (s0.primal_residual > 1e-6) {
    std::ostringstream os;
    os << "frank_wolfe: no feasible point found (primal residual " << s0.primal_residual << ")";
    throw InfeasibleProblem(os.str());
  }

  FwResult res;
  ComplexMatrix rho = hermitian_part(s0.x_blocks[0]);
  double f = obj.value(rho);
  res.rho = rho;
  res.value = f;
  res.gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < config.max_fw_iterations; ++k) {
    const ComplexMatrix g = obj.gradient(rho);
    const ConicSolution lmo =
        solve_checked(adapter, encode_linear_problem(fp, g, config.eps_rep, config.eps_rep).problem, config, "frank_wolfe");
    const ComplexMatrix dir = hermitian_part(lmo.x_blocks[0]) - rho;
    const double gap = -real_inner(g, dir);
    FwIterate it{k, f, gap, 0.0, lmo.iterations};
    if (f <= res.value) res.gap = gap;
    if (gap <= config.fw_gap_tol * std::max(1.0, std::abs(f))) {
      res.trace.push_back(it);
      res.converged = true;
      break;
    }
    auto [t, ft] = golden_section([&](double s) { return obj.value(rho + s * dir); }, 1e-8);
    it.step = t;
    res.trace.push_back(it);
    if (!(ft < f)) break;
    rho = hermitian_part(rho + t * dir);
    f = ft;
    if (f < res.value) {
      res.value = f;
      res.rho = rho;
    }
  }
  return res;
}

double verify_certificate(const FiniteProblem& fp, const ComplexMatrix& gradient, const DualCertificate& cert,
                          const SolverConfig& config, double tol) {
  const auto ineq = scalar_inequalities(fp);
  const int d = fp.num_signals;
  if (cert.y.size() != static_cast<Eigen::Index>(ineq.size()) || cert.Y1.rows() != d || cert.Y2.rows() != d)
    throw DimensionError("verify_certificate: certificate does not match the problem");
  auto fail = [](const std::string& what, double v) {
    std::ostringstream os;
    os << "certificate rejected: " << what << " (" << v << ")";
    throw SolverFailure(os.str());
  };
  if (cert.y.size() > 0 && cert.y.minCoeff() < 0.0) fail("negative multiplier", cert.y.minCoeff());
  if (cert.y_s < 0.0) fail("negative y_s", cert.y_s);
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  if (hermitian_defect(cert.Y1) > tol || hermitian_defect(cert.Y2) > tol) fail("Y1/Y2 not Hermitian", tol);
  const double checks[] = {min_eigenvalue(hermitian_part(cert.Y1)), min_eigenvalue(hermitian_part(cert.Y2)),
                           min_eigenvalue(hermitian_part(cert.y_s * id - cert.Y1)),
                           min_eigenvalue(hermitian_part(cert.y_s * id - cert.Y2))};
  for (double c : checks)
    if (c < -tol) fail("PSD condition on Y1, Y2 or y_s", c);
  const double rmin = min_eigenvalue(dual_residual(fp, gradient, ineq, cert.y, cert.Y1, cert.Y2));
  if (rmin < -tol) fail("dual residual not PSD", rmin);

  double obj = 0.0;
  for (std::size_t j = 0; j < ineq.size(); ++j)
    obj -= cert.y(static_cast<Eigen::Index>(j)) * (ineq[j].rhs + config.eps_rep);
  obj -= cert.y_s * (2.0 * fp.radius + config.eps_rep);
  obj -= real_inner(fp.tau_a, cert.Y1);
  obj += real_inner(fp.tau_a, cert.Y2);
  // A residual eigenvalue of -e costs at most e Tr(sigma) <= e (1 + eps).
  obj -= std::max(0.0, -rmin) * (fp.trace_upper + config.eps_rep);
  return obj;
}

constexpr double kStep2NearResidual = 1e-8;
constexpr double kStep2NearGap = 1e-6;

Step2Result certified_lower_bound(const FiniteProblem& fp, const ComplexMatrix& rho_opt,
                                  const ComplexMatrix& gradient, const SolverConfig& config,
                                  const ConicSolverAdapter& adapter) {
  config.validate();
  const LinearEncoding enc = encode_linear_problem(fp, gradient, config.eps_rep, config.eps_rep);
  Step2Result out;
  out.conic = adapter.submit(enc.problem, conic_options(config));
  // A stalled solve whose dual is within refinement reach of feasibility still
  // yields a valid bound: repair and verification below settle soundness.
  const bool near = std::max(out.conic.primal_residual, out.conic.dual_residual) <= kStep2NearResidual &&
                    out.conic.relative_gap <= kStep2NearGap;
  if (!out.conic.optimal() && !near) {
    std::ostringstream os;
    os << "step 2: conic solver status " << status_name(out.conic.status) << " (primal "
       << out.conic.primal_residual << ", dual " << out.conic.dual_residual << ", gap " << out.conic.relative_gap
       << ")";
    throw SolverFailure(os.str());
  }
  out.near_optimal = !out.conic.optimal();
  const RealVector& y = out.conic.y;
  const int d = fp.num_signals;
  DualCertificate& cert = out.certificate;
  cert.labels = enc.inequality_labels;
  cert.y = RealVector::Zero(static_cast<Eigen::Index>(enc.inequality_duals.size()));
  for (std::size_t j = 0; j < enc.inequality_duals.size(); ++j)
    for (const auto& [row, coeff] : enc.inequality_duals[j]) cert.y(static_cast<Eigen::Index>(j)) += coeff * y(row);
  // The ball rows give Y1 - Y2 = -sum_e y_e B_e; split it into its positive
  // and negative parts.
  ComplexMatrix ydiff = ComplexMatrix::Zero(d, d);
  for (std::size_t e = 0; e < enc.hermitian_basis.size(); ++e)
    ydiff -= y(enc.reduced_row + static_cast<int>(e)) * enc.hermitian_basis[e];
  cert.Y1 = clip_psd(ydiff);
  cert.Y2 = clip_psd(-ydiff);
  cert.y_s = -y(enc.radius_row);

  // Repair: project onto the cones, then shift the trace multiplier until the
  // dual residual is PSD.
  const RealVector y_raw = cert.y;
  cert.y = cert.y.cwiseMax(0.0);
  const double ys_raw = cert.y_s;
  cert.y_s = std::max({cert.y_s, 0.0, max_eigenvalue(cert.Y1), max_eigenvalue(cert.Y2)});
  cert.repaired = (cert.y - y_raw).norm() > 0.0 || cert.y_s != ys_raw;

  const auto ineq = scalar_inequalities(fp);
  const auto trace_it = std::find(cert.labels.begin(), cert.labels.end(), "trace_upper");
  if (trace_it == cert.labels.end()) throw SolverFailure("step 2: no trace upper bound to absorb the repair");
  const auto trace_idx = static_cast<Eigen::Index>(trace_it - cert.labels.begin());
  for (int attempt = 0; attempt < 3; ++attempt) {
    const double lmin = min_eigenvalue(dual_residual(fp, gradient, ineq, cert.y, cert.Y1, cert.Y2));
    cert.min_residual_eigenvalue = lmin;
    if (lmin >= 0.0) break;
    cert.y(trace_idx) += -lmin * (1.0 + 1e-12) + 1e-15;
    cert.repaired = true;
  }
  cert.min_residual_eigenvalue =
      min_eigenvalue(dual_residual(fp, gradient, ineq, cert.y, cert.Y1, cert.Y2));
  cert.objective = verify_certificate(fp, gradient, cert, config);
  const double f = objective_value(rho_opt, fp.objective_regions, config.eig_floor);
  out.c_num = f - real_inner(gradient, rho_opt) + cert.objective;
  return out;
}

namespace {

// Picks key_rate <= u - delta and a reported correction delta' >= delta such
// that u - delta' == key_rate and u - key_rate == delta' hold exactly in
// floating point.
std::pair<double, double> exact_subtraction(double u, double delta) {
  double k = u - delta;
  for (int i = 0; i < 16; ++i) {
    const double d2 = u - k;
    if (d2 >= delta && u - d2 == k) return {k, d2};
    k = std::nextafter(k, -std::numeric_limits<double>::infinity());
  }
  return {u - delta, delta};
}

}  // namespace

constexpr double kStep1Slack = 1e-6;

SolveReport keyrate(const FiniteProblem& fp, const ChannelModel& channel, const ProtocolSpec& spec,
                    const SolverConfig& config, const ConicSolverAdapter& adapter) {
  SolveReport rep;
  const FwResult fw = frank_wolfe(fp, config, adapter);
  rep.step1_value = fw.value;
  rep.step1_state = fw.rho;
  rep.fw_trace = fw.trace;
  rep.fw_gap = fw.gap;
  rep.max_constraint_violation = fp.max_violation(fw.rho);
  rep.gradient = Objective(fp.objective_regions, config.eig_floor).gradient(fw.rho);
  const Step2Result s2 = certified_lower_bound(fp, fw.rho, rep.gradient, config, adapter);
  // Weak duality puts C_num below f at any point of the expanded set; a
  // larger value means the step-1 iterate left that set.
  if (s2.c_num > fw.value + kStep1Slack) {
    std::ostringstream os;
    os << "certified bound " << s2.c_num << " exceeds the step-1 value " << fw.value
       << ": the step-1 iterate violates the constraints by " << rep.max_constraint_violation;
    throw SolverFailure(os.str());
  }
  rep.c_num = s2.c_num;
  rep.certificate = s2.certificate;
  rep.step2_conic_iterations = s2.conic.iterations;
  rep.step2_status = s2.conic.status;

  const JointDistribution jd = joint_distribution(spec, channel);
  rep.sift_prob = jd.sift_prob;
  rep.ec_cost = jd.sift_prob * ec_cost(jd.sifted(), spec.beta_ec);
  rep.W = fp.W;
  const auto [k, delta] = exact_subtraction(rep.c_num - rep.ec_cost, fp.delta_correction);
  rep.key_rate = k;
  rep.delta_correction = delta;

  if (s2.near_optimal) {
    std::ostringstream os;
    os << "step 2 solver stalled near optimum (status " << status_name(s2.conic.status) << ", gap "
       << s2.conic.relative_gap << "); certificate verified";
    rep.warnings.push_back(os.str());
  }
  if (!fw.converged) {
    std::ostringstream os;
    os << "Frank-Wolfe stopped with gap " << fw.gap << " after " << fw.trace.size() << " iterations";
    rep.warnings.push_back(os.str());
  }
  if (rep.c_num > 0.0 && rep.delta_correction > 0.1 * rep.c_num) {
    rep.warnings.push_back(
        "correction term exceeds 10% of C_num: consider a larger N, or a smaller N if step-1 constraint "
        "violations dominate");
  }
  return rep;
}

PointSetup setup_point(const ProtocolSpec& spec, const ChannelModel& channel, int cutoff, Moments effective) {
  spec.validate();
  channel.validate();
  if (cutoff < 1) throw SpecError("subspace cutoff N must be at least 1");
  if (static_cast<int>(effective.exp_n.size()) != spec.num_signals() ||
      static_cast<int>(effective.exp_nsq.size()) != spec.num_signals())
    throw DimensionError("setup_point: one pair of moments per signal expected");
  DisplacedBasis basis(channel_amplitudes(spec, channel), cutoff);
  const OperatorSet ops = build_operator_set(spec, basis);
  WeightBound w = weight_bound_dmcv(effective.exp_n, effective.exp_nsq, spec.p, cutoff);
  FiniteProblem fp = assemble_finite_problem(ops, effective.exp_n, effective.exp_nsq, spec, basis, w);
  return {std::move(basis), std::move(effective), std::move(w), std::move(fp)};
}

PointSetup setup_simulated_point(const ProtocolSpec& spec, const ChannelModel& channel, int cutoff) {
  Moments m = simulate_expectations(channel, spec.num_signals());
  if (spec.detector.kind == DetectorKind::trusted)
    m = effective_expectations(noisy_expectations(m, spec.detector), spec.detector);
  return setup_point(spec, channel, cutoff, std::move(m));
}

}  // namespace cvqkd
