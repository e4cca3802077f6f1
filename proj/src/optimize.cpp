#include "cvqkd/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cvqkd/protocol.hpp"

namespace cvqkd {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // (sqrt 5 - 1) / 2

double score(const ScalarProbe& p) { return p.value ? *p.value : -std::numeric_limits<double>::infinity(); }

// True when the values, ordered by x, go up and then down (plateaus allowed).
bool unimodal(std::vector<ScalarProbe> probes) {
  std::sort(probes.begin(), probes.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  bool falling = false;
  for (std::size_t i = 1; i < probes.size(); ++i) {
    const double prev = score(probes[i - 1]), cur = score(probes[i]);
    if (cur < prev) falling = true;
    if (falling && cur > prev) return false;
  }
  return true;
}

}  // namespace

int golden_probe_bound(double width, double tol) {
  if (width <= tol) return 1;
  return static_cast<int>(std::ceil(std::log(width / tol) / std::log(1.0 / kInvPhi))) + 2;
}

ScalarOptimum optimize_scalar(const std::function<std::optional<double>(double)>& evaluate, double lo,
                              double hi, double tol) {
  if (!(lo < hi)) throw SpecError("optimize_scalar: need lo < hi");
  if (!(tol > 0.0)) throw SpecError("optimize_scalar: tol must be positive");
  ScalarOptimum out;
  auto probe = [&](double x) {
    out.probes.push_back({x, evaluate(x)});
    return score(out.probes.back());
  };

  if (hi - lo <= tol) {
    probe(0.5 * (lo + hi));
  } else {
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double fc = probe(c), fd = probe(d);
    while (b - a > tol) {
      if (fc >= fd) {
        b = d;
        if (b - a <= tol) break;
        d = c;
        fd = fc;
        c = b - kInvPhi * (b - a);
        fc = probe(c);
      } else {
        a = c;
        if (b - a <= tol) break;
        c = d;
        fc = fd;
        d = a + kInvPhi * (b - a);
        fd = probe(d);
      }
    }
  }

  const auto best = std::max_element(out.probes.begin(), out.probes.end(),
                                     [](const auto& p, const auto& q) { return score(p) < score(q); });
  if (!best->value) throw std::runtime_error("optimize_scalar: every probe failed");
  out.x = best->x;
  out.value = *best->value;
  out.non_unimodal = !unimodal(out.probes);
  return out;
}

}  // namespace cvqkd
