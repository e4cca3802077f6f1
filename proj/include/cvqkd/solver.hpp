#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvqkd/channel.hpp"
#include "cvqkd/conic.hpp"
#include "cvqkd/dimred.hpp"

namespace cvqkd {

/// The conic back end did not return a usable answer.
class SolverFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The finite problem has no feasible point.
class InfeasibleProblem : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  int max_fw_iterations = 30;
  double fw_gap_tol = 1e-6;
  double eig_floor = 1e-12;
  double eps_rep = 1e-10;
  double conic_tol = 1e-9;

  void validate() const;
  bool operator==(const SolverConfig&) const = default;
};

/// f(rho) = D(G(rho) || Z(G(rho))) in bits, with G(rho) = sum_zz' |z><z'| (x) sqrt(P_z) rho sqrt(P_z')
/// and Z the pinching on the key register. Precomputes the square roots once.
class Objective {
public:
  Objective(std::vector<ComplexMatrix> regions, double eig_floor);

  int dim() const { return static_cast<int>(sqrt_p_.rows()); }
  double value(const ComplexMatrix& rho) const;
  ComplexMatrix gradient(const ComplexMatrix& rho) const;

private:
  ComplexMatrix checked(const ComplexMatrix& rho) const;

  std::vector<ComplexMatrix> sqrt_pz_;
  ComplexMatrix sqrt_p_;
  double floor_;
};

double objective_value(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& regions,
                       double eig_floor = 1e-12);
ComplexMatrix objective_gradient(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& regions,
                                 double eig_floor = 1e-12);

/// min Tr(C rho) over the finite problem's feasible set, as a standard-form
/// conic program. The reduced-state ball uses the trace-norm slacks R, S >= 0:
///   Tr_B rho - tau = R - S,  Tr R + Tr S <= 2r + eps'.
/// A two-sided window lo <= Tr(G rho) <= hi is one row with bounded slacks,
///   Tr(G rho) - s_lo = lo - eps,  s_lo + s_hi = hi - lo + 2 eps,
/// which avoids the near-dependent row pair of two separate inequalities.
/// Every scalar bound is loosened by `eps`. Both steps use the loosened set,
/// which keeps an interior even when W = 0.
struct LinearEncoding {
  ConicProblem problem;
  // Per scalar inequality Tr(op rho) <= rhs of the printed dual (constraint
  // order): label, and its multiplier as a combination of conic dual entries.
  std::vector<std::string> inequality_labels;
  std::vector<std::vector<std::pair<int, double>>> inequality_duals;
  std::vector<ComplexMatrix> hermitian_basis;  // orthonormal basis of Herm(d)
  int reduced_row = -1;                        // first of the d^2 reduced-state rows
  int radius_row = -1;
};

LinearEncoding encode_linear_problem(const FiniteProblem& problem, const ComplexMatrix& cost, double eps,
                                     double eps_prime);

struct FwIterate {
  int iteration = 0;
  double value = 0.0;
  double gap = 0.0;
  double step = 0.0;
  int conic_iterations = 0;
};

struct FwResult {
  ComplexMatrix rho;
  double value = 0.0;
  double gap = 0.0;
  bool converged = false;
  std::vector<FwIterate> trace;
};

/// Frank-Wolfe from an interior feasible point found by a zero-cost conic solve.
FwResult frank_wolfe(const FiniteProblem& problem, const SolverConfig& config,
                     const ConicSolverAdapter& adapter);

struct DualCertificate {
  RealVector y;  // one entry per scalar inequality, >= 0
  std::vector<std::string> labels;
  double y_s = 0.0;
  ComplexMatrix Y1, Y2;
  double objective = 0.0;
  double min_residual_eigenvalue = 0.0;  // of sum y_i Gamma_i + xi(Y1) - xi(Y2) + grad
  bool repaired = false;
};

struct Step2Result {
  double c_num = 0.0;
  DualCertificate certificate;
  ConicSolution conic;
  bool near_optimal = false;  // accepted from a stalled solve with tiny residuals
};

/// Solves the expanded linearised problem, extracts (y, y_s, Y1, Y2) from its
/// dual, repairs small infeasibilities and re-verifies the certificate by
/// eigenvalue checks. Throws SolverFailure unless the adapter reports optimal
/// (or stalls with residuals <= 1e-8 and gap <= 1e-6, flagged near_optimal)
/// and the certificate verifies.
Step2Result certified_lower_bound(const FiniteProblem& problem, const ComplexMatrix& rho_opt,
                                  const ComplexMatrix& gradient, const SolverConfig& config,
                                  const ConicSolverAdapter& adapter);

/// Independent check of a certificate against the problem data. Returns the
/// dual objective, throws SolverFailure when a cone condition fails by more than tol.
double verify_certificate(const FiniteProblem& problem, const ComplexMatrix& gradient,
                          const DualCertificate& cert, const SolverConfig& config, double tol = 1e-8);

struct SolveReport {
  double step1_value = 0.0;
  ComplexMatrix step1_state;
  ComplexMatrix gradient;
  double c_num = 0.0;
  DualCertificate certificate;
  double delta_correction = 0.0;
  double ec_cost = 0.0;
  double sift_prob = 1.0;
  double W = 0.0;
  double key_rate = 0.0;
  // Diagnostics.
  std::vector<FwIterate> fw_trace;
  double fw_gap = 0.0;
  double max_constraint_violation = 0.0;
  int step2_conic_iterations = 0;
  ConicStatus step2_status = ConicStatus::optimal;
  std::vector<std::string> warnings;
};

/// frank_wolfe, then certified_lower_bound, then subtracts the error-correction
/// cost and the correction term.
SolveReport keyrate(const FiniteProblem& problem, const ChannelModel& channel, const ProtocolSpec& spec,
                    const SolverConfig& config, const ConicSolverAdapter& adapter);

/// Everything needed for one simulated point: basis at the channel output
/// amplitudes, operators, simulated (and, with a trusted detector, noisy then
/// inverted) moments, W and the finite problem.
struct PointSetup {
  DisplacedBasis basis;
  Moments moments;
  WeightBound weight;
  FiniteProblem problem;
};

/// Builds the point from given effective moments (one pair per signal).
PointSetup setup_point(const ProtocolSpec& spec, const ChannelModel& channel, int cutoff, Moments effective);

PointSetup setup_simulated_point(const ProtocolSpec& spec, const ChannelModel& channel, int cutoff);

}  // namespace cvqkd
