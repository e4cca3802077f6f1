#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvqkd/optimize.hpp"
#include "cvqkd/solver.hpp"

namespace cvqkd {

/// Malformed or invalid run configuration; the message names the line or field.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ScanVariable { distance_km, xi, alpha, delta_a };

std::string variable_name(ScanVariable v);

struct SweepSpec {
  ScanVariable variable = ScanVariable::distance_km;
  std::vector<double> grid;
  bool operator==(const SweepSpec&) const = default;
};

struct OptimizeSpec {
  ScanVariable variable = ScanVariable::alpha;  // alpha or delta_a
  double lo = 0.5;
  double hi = 2.0;
  double tol = 0.05;
  bool operator==(const OptimizeSpec&) const = default;
};

enum class RunMode { single, sweep, optimize };

/// QPSK run description. Units: km, dB/km, radians.
struct RunConfig {
  double alpha = 0.6;
  double delta_a = 0.0;
  double delta_p = 0.0;
  DetectorModel detector;
  double beta_ec = 0.95;
  ChannelModel channel;
  int subspace_N = 10;
  SolverConfig solver;
  std::optional<SweepSpec> sweep;
  std::optional<OptimizeSpec> optimize;

  RunMode mode() const { return sweep ? RunMode::sweep : optimize ? RunMode::optimize : RunMode::single; }
  ProtocolSpec spec() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Copy with one scanned variable replaced.
  RunConfig with(ScanVariable v, double value) const;

  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates a JSON document. Throws ConfigError.
RunConfig parse_run_config(const std::string& text);
/// Reads a file and parses it. Throws IoError when the file cannot be read.
RunConfig load_run_config(const std::string& path);
/// JSON form of a config; parse_run_config(echo_run_config(c)) == c.
std::string echo_run_config(const RunConfig& config);

enum class RowStatus { ok, solver_failed, infeasible };

std::string status_name(RowStatus s);

struct ResultRow {
  double distance_km = 0.0;
  double xi = 0.0;
  double eta = 1.0;
  double alpha = 0.0;
  double delta_a = 0.0;
  double delta_p = 0.0;
  int N = 0;
  double eta_d = 1.0;
  double nu_el = 0.0;
  double W = 0.0;
  double delta_correction = 0.0;
  double ec_cost = 0.0;
  double sift_prob = 1.0;
  // Empty unless status is ok.
  std::optional<double> C_num;
  std::optional<double> key_rate;
  std::optional<double> key_rate_uncorrected;
  RowStatus status = RowStatus::ok;
  std::string message;  // failure reason or solver warnings
};

/// One solve at the configured point. Solver failures become row statuses;
/// invalid parameters throw. With `effective`, those moments replace the
/// simulated ones.
ResultRow evaluate_point(const RunConfig& config, const ConicSolverAdapter& adapter,
                         const std::optional<Moments>& effective = std::nullopt);

/// Evaluates every grid point on up to `jobs` threads; rows come back in grid
/// order whatever the scheduling.
std::vector<ResultRow> run_sweep(const RunConfig& config, const ConicSolverAdapter& adapter, int jobs);

struct OptimizeOutcome {
  ScalarOptimum optimum;
  std::vector<ResultRow> rows;  // one per probe, in probe order
};

/// Golden-section maximisation of the key rate over the configured variable.
/// Failed probes count as -inf.
OptimizeOutcome run_optimize(const RunConfig& config, const ConicSolverAdapter& adapter);

/// Effective moments from per-signal heterodyne sample files: outcomes are
/// centred on the expected mean sqrt(eta_d eta) alpha_i, then inverted through
/// the trusted-detector relations when the detector is trusted.
Moments moments_from_sample_files(const RunConfig& config, const std::vector<std::string>& paths);

std::string csv_header();
std::string csv_line(const ResultRow& row);
/// Writes header plus rows; throws IoError if the file cannot be written.
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);

}  // namespace cvqkd
