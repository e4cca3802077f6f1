#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace cvqkd {

struct ScalarProbe {
  double x = 0.0;
  std::optional<double> value;  // empty when the evaluator failed at x
};

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
  std::vector<ScalarProbe> probes;  // in evaluation order
  bool non_unimodal = false;        // probe values do not rise then fall
};

/// Upper bound on the number of probes for an interval of width `width`.
int golden_probe_bound(double width, double tol);

/// Golden-section maximisation of an (assumed unimodal) function on [lo, hi]
/// until the bracket is no wider than tol. Failed probes count as -inf.
/// Returns the best probe; throws std::runtime_error if every probe failed.
ScalarOptimum optimize_scalar(const std::function<std::optional<double>(double)>& evaluate, double lo,
                              double hi, double tol);

}  // namespace cvqkd
