#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cvqkd/fock.hpp"
#include "cvqkd/linalg.hpp"

namespace cvqkd {

/// Invalid protocol, channel or solver parameters.
class SpecError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class DetectorKind { ideal, trusted };

struct DetectorModel {
  DetectorKind kind = DetectorKind::ideal;
  double eta_d = 1.0;
  double nu_el = 0.0;

  /// n_bar = (1 - eta_d + nu_el) / eta_d; zero for the ideal detector.
  double thermal_mean() const;
  void validate() const;

  bool operator==(const DetectorModel&) const = default;

  static DetectorModel ideal() { return {}; }
  static DetectorModel trusted(double eta_d, double nu_el) {
    return {DetectorKind::trusted, eta_d, nu_el};
  }
};

inline constexpr int kNumKeySymbols = 4;

struct ProtocolSpec {
  std::vector<cplx> alpha;
  std::vector<double> p;
  double delta_a = 0.0;  // amplitude postselection radius
  double delta_p = 0.0;  // phase postselection half-width, radians
  DetectorModel detector;
  double beta_ec = 0.95;

  int num_signals() const { return static_cast<int>(alpha.size()); }
  void validate() const;

  /// alpha * {1, i, -1, -i} with uniform priors.
  static ProtocolSpec qpsk(double amplitude, double delta_a = 0.0, double delta_p = 0.0,
                           DetectorModel detector = DetectorModel::ideal(), double beta_ec = 0.95);
};

/// Angular bounds [lo, hi] of key sector z after phase postselection.
std::pair<double, double> key_sector(int z, double delta_p);

/// Upper radial quadrature limit |beta| + 12 + 6 sqrt(1 + n_bar); the kernel tail
/// beyond it is below 1e-14.
double radial_upper_limit(double beta_abs, double thermal_mean);

/// <m|D(kappa) rho_th(n_bar) D(kappa)^dagger|n> in closed form.
cplx displaced_thermal_element(int m, int n, cplx kappa, double n_bar);

/// Full (N+1) x (N+1) displaced-thermal matrix, Hermitian.
ComplexMatrix displaced_thermal_matrix(int size, cplx kappa, double n_bar);

/// <m_{beta_i}|R^z|n_{beta_i}> for the sector z of the key map, integrated in
/// polar coordinates. The trusted-noise variant integrates the displaced
/// thermal kernel in the rescaled plane u = zeta / sqrt(eta_d).
ComplexMatrix region_operator(int z, const ProtocolSpec& spec, const DisplacedBasis& basis,
                              int signal);

struct ObservableSet {
  std::vector<ComplexMatrix> n_obs;    // |i><i| (x) n_{beta_i}, full dimension
  std::vector<ComplexMatrix> nsq_obs;  // |i><i| (x) n^2_{beta_i}
};

ObservableSet observable_matrices(const ProtocolSpec& spec, const DisplacedBasis& basis);

struct NoisyObservableReport {
  double max_deviation_n = 0.0;
  double max_deviation_nsq = 0.0;
  double max_deviation() const { return std::max(max_deviation_n, max_deviation_nsq); }
};

/// Compares both sides of the trusted-noise identities
///   noisy(n)   = eta_d n + nu_el
///   noisy(n^2) = eta_d^2 n^2 + eta_d (4 nu_el + 1 - eta_d) n + (2 nu_el^2 + nu_el)
/// on the diagonal for n = 0..truncation. The left side is evaluated from the
/// displaced-thermal POVM by exact Gamma-function moments.
NoisyObservableReport noisy_observable_check(double eta_d, double nu_el, int truncation);

/// tau_A = sum_ij sqrt(p_i p_j) <alpha_j|alpha_i> |i><j|.
ComplexMatrix reduced_state_target(const ProtocolSpec& spec);

struct OperatorSet {
  std::vector<ComplexMatrix> regions;  // R^z over the full d(N+1) space, block diagonal
  ObservableSet observables;
  ComplexMatrix tau_a;
};

OperatorSet build_operator_set(const ProtocolSpec& spec, const DisplacedBasis& basis);

}  // namespace cvqkd
