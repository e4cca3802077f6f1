#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cvqkd {

class QuadratureError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// Gauss-Legendre rule of the given order (Newton iteration on P_n). Cached.
const GaussRule& gauss_legendre(int order);

/// Nodes and weights of the 15-point Kronrod rule on [lo, hi]. `gauss` holds
/// the embedded 7-point Gauss weights (zero at Kronrod-only nodes).
struct KronrodPanel {
  std::array<double, 15> x;
  std::array<double, 15> kronrod;
  std::array<double, 15> gauss;
};
KronrodPanel kronrod_panel(double lo, double hi);

/// A panel evaluation: the value to keep and an error estimate for it.
template <class T>
struct PanelEstimate {
  T value;
  double error = 0.0;
};

template <class T>
struct AdaptiveResult {
  T value;
  double error = 0.0;
  int panels = 0;
};

/// Globally adaptive bisection over [lo, hi]. `panel(a, b)` integrates one
/// subinterval and reports its own error (typically |Kronrod - Gauss|). The
/// subinterval with the largest error is split until the summed error drops
/// below `target_tol` or `max_panels` is reached; a result whose error still
/// exceeds `fail_tol` raises QuadratureError.
template <class T>
AdaptiveResult<T> integrate_adaptive(const std::function<PanelEstimate<T>(double, double)>& panel,
                                     double lo, double hi, double target_tol, double fail_tol,
                                     int max_panels = 400) {
  struct Item {
    double a, b;
    PanelEstimate<T> est;
  };
  auto cmp = [](const Item& l, const Item& r) { return l.est.error < r.est.error; };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
  heap.push({lo, hi, panel(lo, hi)});
  double total_err = heap.top().est.error;
  int count = 1;
  while (total_err > target_tol && count < max_panels) {
    Item worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(std::move(worst));
      break;
    }
    Item left{worst.a, mid, panel(worst.a, mid)};
    Item right{mid, worst.b, panel(mid, worst.b)};
    total_err += left.est.error + right.est.error - worst.est.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++count;
  }
  // Re-sum in a deterministic order (by left endpoint) to avoid drift in the
  // running error total and make the result independent of heap internals.
  std::vector<Item> items;
  items.reserve(heap.size());
  while (!heap.empty()) {
    items.push_back(heap.top());
    heap.pop();
  }
  std::sort(items.begin(), items.end(), [](const Item& l, const Item& r) { return l.a < r.a; });
  AdaptiveResult<T> out{items.front().est.value, 0.0, count};
  out.error = items.front().est.error;
  for (std::size_t i = 1; i < items.size(); ++i) {
    out.value += items[i].est.value;
    out.error += items[i].est.error;
  }
  if (out.error > fail_tol) {
    std::ostringstream os;
    os << "adaptive quadrature did not converge: estimated error " << out.error << " after "
       << count << " panels on [" << lo << ", " << hi << "]";
    throw QuadratureError(os.str());
  }
  return out;
}

/// Scalar convenience wrapper using Gauss-Kronrod 7/15 panels.
AdaptiveResult<double> integrate_gk15(const std::function<double(double)>& f, double lo,
                                      double hi, double target_tol = 1e-13,
                                      double fail_tol = 1e-9);

}  // namespace cvqkd
