#include "cvqkd/quadrature.hpp"

#include <map>
#include <mutex>
#include <numbers>

namespace cvqkd {

namespace {

GaussRule build_gauss_legendre(int order) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1.0;
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= order; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(order - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(order - 1 - i)] = w;
  }
  if (order % 2 == 1) rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
  return rule;
}

// QUADPACK qk15 abscissae (descending, last is the centre) and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace

const GaussRule& gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_gauss_legendre(order)).first;
  return it->second;
}

KronrodPanel kronrod_panel(double lo, double hi) {
  KronrodPanel p{};
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  for (int j = 0; j < 7; ++j) {
    p.x[static_cast<std::size_t>(j)] = c - h * kXgk[static_cast<std::size_t>(j)];
    p.x[static_cast<std::size_t>(14 - j)] = c + h * kXgk[static_cast<std::size_t>(j)];
    p.kronrod[static_cast<std::size_t>(j)] = h * kWgk[static_cast<std::size_t>(j)];
    p.kronrod[static_cast<std::size_t>(14 - j)] = h * kWgk[static_cast<std::size_t>(j)];
    const double g = (j % 2 == 1) ? h * kWg[static_cast<std::size_t>(j / 2)] : 0.0;
    p.gauss[static_cast<std::size_t>(j)] = g;
    p.gauss[static_cast<std::size_t>(14 - j)] = g;
  }
  p.x[7] = c;
  p.kronrod[7] = h * kWgk[7];
  p.gauss[7] = h * kWg[3];
  return p;
}

AdaptiveResult<double> integrate_gk15(const std::function<double(double)>& f, double lo,
                                      double hi, double target_tol, double fail_tol) {
  const std::function<PanelEstimate<double>(double, double)> panel = [&f](double a, double b) {
    const KronrodPanel p = kronrod_panel(a, b);
    double k = 0.0;
    double g = 0.0;
    for (std::size_t j = 0; j < 15; ++j) {
      const double v = f(p.x[j]);
      k += p.kronrod[j] * v;
      g += p.gauss[j] * v;
    }
    return PanelEstimate<double>{k, std::abs(k - g)};
  };
  return integrate_adaptive<double>(panel, lo, hi, target_tol, fail_tol);
}

}  // namespace cvqkd
