#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cvqkd/fock.hpp"
#include "cvqkd/protocol.hpp"

namespace cvqkd {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Lossy fibre with excess noise referred to the channel input.
struct ChannelModel {
  double distance_km = 0.0;
  double attenuation_db_per_km = 0.2;
  double xi = 0.0;

  /// eta = 10^(-k L / 10).
  double eta() const;
  /// delta = eta * xi.
  double delta() const;
  void validate() const;
  bool operator==(const ChannelModel&) const = default;
};

/// Per-signal first and second moments of the displaced number operator.
struct Moments {
  std::vector<double> exp_n;
  std::vector<double> exp_nsq;
};

/// <n> = delta/2 and <n^2> = delta(1+delta)/2 for every signal.
Moments simulate_expectations(const ChannelModel& channel, int num_signals);

/// Ideal moments pushed through the trusted-detector relations
///   <n~> = eta_d <n> + nu_el,
///   <n~^2> = eta_d^2 <n^2> + eta_d (4 nu_el + 1 - eta_d) <n> + 2 nu_el^2 + nu_el.
Moments noisy_expectations(const Moments& ideal, const DetectorModel& detector);

/// Inverse of noisy_expectations. Throws SpecError when an effective value
/// comes out negative, which signals an inconsistent detector characterisation.
Moments effective_expectations(const Moments& noisy, const DetectorModel& detector);

/// p(j|i) over j in {0..3, discard}. Rows of `conditional` sum to one.
struct JointDistribution {
  Eigen::MatrixXd conditional;  // d x 5, last column is the discard outcome
  Eigen::MatrixXd joint;        // d x 5, p_i p(j|i)
  double sift_prob = 1.0;       // probability of a kept outcome

  /// The kept part of `joint` renormalised to unit mass (d x 4).
  Eigen::MatrixXd sifted() const;
};

inline constexpr int kDiscardColumn = 4;

/// Distribution of Bob's key-map outcome under the simulated Gaussian channel:
/// the heterodyne outcome is Gaussian around sqrt(eta_d eta) alpha_i with
/// variance 1 + eta_d delta / 2 + nu_el.
JointDistribution joint_distribution(const ProtocolSpec& spec, const ChannelModel& channel);

/// 2 - beta_EC [H(q_A) + H(q_B) - H(q_AB)] for a kept-outcome distribution q
/// (renormalised here if it is not already). Entropies in bits, 0 log 0 = 0.
double ec_cost(const Eigen::MatrixXd& q, double beta_ec);

/// Sample means of f_n = |zeta - beta|^2 - 1 and f_{n^2} = |zeta - beta|^4 - 3|zeta - beta|^2 + 1.
/// Raw estimates are returned even when unphysical.
std::pair<double, double> expectations_from_samples(const std::vector<cplx>& samples, cplx beta);

/// Reads heterodyne outcomes from a CSV file with one `re,im` pair per line.
/// Blank lines, `#` comments and an optional `re,im` header are skipped.
std::vector<cplx> read_samples_csv(const std::string& path);

/// The honest source-replacement state after the simulated channel, restricted
/// to the displaced subspace (projected, hence slightly subnormalised).
ComplexMatrix simulated_state(const ProtocolSpec& spec, const ChannelModel& channel,
                              const DisplacedBasis& basis);

/// beta_i = sqrt(eta) alpha_i.
std::vector<cplx> channel_amplitudes(const ProtocolSpec& spec, const ChannelModel& channel);

}  // namespace cvqkd
