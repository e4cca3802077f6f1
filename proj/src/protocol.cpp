#include "cvqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "cvqkd/kernels.hpp"
#include "cvqkd/quadrature.hpp"

namespace cvqkd {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kThetaOrder = 64;
constexpr double kRegionTargetTol = 1e-12;
constexpr double kRegionFailTol = 1e-9;

double log_factorial(int n) { return std::lgamma(n + 1.0); }

// Lower triangle of H += sum_k w_k K(kappa_k) for a batch of nodes.
using BatchAccumulator = std::function<void(const std::vector<double>& kre,
                                            const std::vector<double>& kim,
                                            const std::vector<double>& w, ComplexMatrix& h)>;

BatchAccumulator coherent_accumulator(int levels) {
  return [levels](const std::vector<double>& kre, const std::vector<double>& kim,
                  const std::vector<double>& w, ComplexMatrix& h) {
    const std::size_t count = kre.size();
    std::vector<double> vre(count * static_cast<std::size_t>(levels));
    std::vector<double> vim(count * static_cast<std::size_t>(levels));
    kernels::coherent_vectors(kre.data(), kim.data(), count, levels, vre.data(), vim.data());
    kernels::accumulate_outer(vre.data(), vim.data(), w.data(), count, levels, h.data());
  };
}

// The closed-form displaced-thermal element factorises into a node-independent
// coefficient table and powers of x = |kappa|^2 and kappa, so the per-node work
// is polynomial evaluation only.
BatchAccumulator thermal_accumulator(int levels, double n_bar) {
  const double a = 1.0 + n_bar;
  const std::size_t L = static_cast<std::size_t>(levels);
  auto coeff = std::make_shared<std::vector<double>>(L * L * L, 0.0);
  for (int m = 0; m < levels; ++m)
    for (int n = 0; n <= m; ++n)
      for (int j = 0; j <= n; ++j) {
        const int e = n - j;
        if (n_bar == 0.0 && e > 0) continue;
        double lc = log_factorial(m) - log_factorial(e) - log_factorial(m - e) - log_factorial(j) -
                    (m + 1.0 + j) * std::log(a) + 0.5 * (log_factorial(n) - log_factorial(m));
        if (e > 0) lc += e * std::log(n_bar);
        (*coeff)[(static_cast<std::size_t>(m) * L + static_cast<std::size_t>(n)) * L +
                 static_cast<std::size_t>(j)] = std::exp(lc);
      }
  return [levels, a, L, coeff](const std::vector<double>& kre, const std::vector<double>& kim,
                               const std::vector<double>& w, ComplexMatrix& h) {
    std::vector<double> xp(L);
    std::vector<cplx> kp(L);
    for (std::size_t k = 0; k < kre.size(); ++k) {
      if (w[k] == 0.0) continue;
      const cplx kappa(kre[k], kim[k]);
      const double x = std::norm(kappa);
      const double scale = w[k] * std::exp(-x / a);
      xp[0] = 1.0;
      kp[0] = scale;
      for (std::size_t j = 1; j < L; ++j) {
        xp[j] = xp[j - 1] * x;
        kp[j] = kp[j - 1] * kappa;
      }
      for (int n = 0; n < levels; ++n)
        for (int m = n; m < levels; ++m) {
          const double* c = coeff->data() + (static_cast<std::size_t>(m) * L + n) * L;
          double poly = 0.0;
          for (int j = 0; j <= n; ++j) poly += c[j] * xp[static_cast<std::size_t>(j)];
          h(m, n) += poly * kp[static_cast<std::size_t>(m - n)];
        }
    }
  };
}

double lower_max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  double out = 0.0;
  for (Eigen::Index n = 0; n < a.cols(); ++n)
    for (Eigen::Index m = n; m < a.rows(); ++m) out = std::max(out, std::abs(a(m, n) - b(m, n)));
  return out;
}

// (1/pi) * integral over the annular sector r in [r_lo, r_hi], theta in
// [th_lo, th_hi] of K(r e^{i theta} - beta) r dr dtheta. The radial direction is
// adaptive Gauss-Kronrod; the angular rule is Gauss-Legendre at a fixed order
// with its doubled order folded into the error estimate.
ComplexMatrix integrate_sector(double r_lo, double r_hi, double th_lo, double th_hi, cplx beta,
                               int levels, const BatchAccumulator& acc) {
  if (!(r_hi > r_lo) || !(th_hi > th_lo)) return ComplexMatrix::Zero(levels, levels);
  const double th_mid = 0.5 * (th_lo + th_hi);
  const double th_half = 0.5 * (th_hi - th_lo);
  const GaussRule& rule_lo = gauss_legendre(kThetaOrder);
  const GaussRule& rule_hi = gauss_legendre(2 * kThetaOrder);

  const std::function<PanelEstimate<ComplexMatrix>(double, double)> panel =
      [&](double a, double b) {
        const KronrodPanel p = kronrod_panel(a, b);
        auto build = [&](const GaussRule& rule, bool want_gauss, ComplexMatrix& hk,
                         ComplexMatrix& hg) {
          const std::size_t nt = rule.nodes.size();
          const std::size_t count = 15 * nt;
          std::vector<double> kre(count), kim(count), wk(count), wg(count);
          for (std::size_t j = 0; j < 15; ++j) {
            const double r = p.x[j];
            for (std::size_t t = 0; t < nt; ++t) {
              const double th = th_mid + th_half * rule.nodes[t];
              const double wt = th_half * rule.weights[t] * r / kPi;
              const std::size_t idx = j * nt + t;
              kre[idx] = r * std::cos(th) - beta.real();
              kim[idx] = r * std::sin(th) - beta.imag();
              wk[idx] = p.kronrod[j] * wt;
              wg[idx] = p.gauss[j] * wt;
            }
          }
          hk.setZero(levels, levels);
          acc(kre, kim, wk, hk);
          if (want_gauss) {
            hg.setZero(levels, levels);
            acc(kre, kim, wg, hg);
          }
        };
        ComplexMatrix k64, g64, k128, unused;
        build(rule_lo, true, k64, g64);
        build(rule_hi, false, k128, unused);
        const double err = lower_max_abs_diff(k64, g64) + lower_max_abs_diff(k128, k64);
        return PanelEstimate<ComplexMatrix>{k128, err};
      };

  const auto res =
      integrate_adaptive<ComplexMatrix>(panel, r_lo, r_hi, kRegionTargetTol, kRegionFailTol);
  ComplexMatrix h = res.value;
  for (int n = 0; n < levels; ++n) {
    h(n, n) = cplx(h(n, n).real(), 0.0);
    for (int m = n + 1; m < levels; ++m) h(n, m) = std::conj(h(m, n));
  }
  return h;
}

}  // namespace

double DetectorModel::thermal_mean() const {
  if (kind == DetectorKind::ideal) return 0.0;
  return (1.0 - eta_d + nu_el) / eta_d;
}

void DetectorModel::validate() const {
  if (!(eta_d > 0.0 && eta_d <= 1.0)) throw SpecError("detector eta_d must lie in (0, 1]");
  if (!(nu_el >= 0.0)) throw SpecError("detector nu_el must be non-negative");
  if (kind == DetectorKind::ideal && (eta_d != 1.0 || nu_el != 0.0))
    throw SpecError("ideal detector requires eta_d = 1 and nu_el = 0");
}

void ProtocolSpec::validate() const {
  if (alpha.empty()) throw SpecError("protocol needs at least one signal state");
  if (p.size() != alpha.size()) throw SpecError("protocol: p and alpha differ in length");
  double total = 0.0;
  for (double pi : p) {
    if (!(pi >= 0.0)) throw SpecError("protocol: probabilities must be non-negative");
    total += pi;
  }
  if (std::abs(total - 1.0) > 1e-9) throw SpecError("protocol: probabilities must sum to 1");
  if (!(delta_a >= 0.0)) throw SpecError("protocol: delta_a must be non-negative");
  if (!(delta_p >= 0.0 && delta_p < kPi / 4.0))
    throw SpecError("protocol: delta_p must lie in [0, pi/4)");
  if (!(beta_ec > 0.0 && beta_ec <= 1.0)) throw SpecError("protocol: beta_ec must lie in (0, 1]");
  detector.validate();
}

ProtocolSpec ProtocolSpec::qpsk(double amplitude, double delta_a, double delta_p,
                                DetectorModel detector, double beta_ec) {
  ProtocolSpec s;
  s.alpha = {cplx(amplitude, 0.0), cplx(0.0, amplitude), cplx(-amplitude, 0.0),
             cplx(0.0, -amplitude)};
  s.p = {0.25, 0.25, 0.25, 0.25};
  s.delta_a = delta_a;
  s.delta_p = delta_p;
  s.detector = detector;
  s.beta_ec = beta_ec;
  return s;
}

std::pair<double, double> key_sector(int z, double delta_p) {
  if (z < 0 || z >= kNumKeySymbols) throw SpecError("key symbol out of range");
  return {(2 * z - 1) * kPi / 4.0 + delta_p, (2 * z + 1) * kPi / 4.0 - delta_p};
}

double radial_upper_limit(double beta_abs, double thermal_mean) {
  return beta_abs + 12.0 + 6.0 * std::sqrt(1.0 + thermal_mean);
}

cplx displaced_thermal_element(int m, int n, cplx kappa, double n_bar) {
  if (m < 0 || n < 0) throw DimensionError("displaced_thermal_element: negative Fock index");
  if (m < n) return std::conj(displaced_thermal_element(n, m, kappa, n_bar));
  const int k = m - n;
  const double x = std::norm(kappa);
  const double a = 1.0 + n_bar;
  // sum_j C(m, n-j) x^j n_bar^(n-j) / (a^j j!), with 0^0 = 1.
  double sum = 0.0;
  for (int j = 0; j <= n; ++j) {
    const int e = n - j;
    if (n_bar == 0.0 && e > 0) continue;
    const double log_binom = log_factorial(m) - log_factorial(e) - log_factorial(m - e);
    double term = std::exp(log_binom - log_factorial(j) - j * std::log(a));
    if (j > 0) term *= std::pow(x, j);
    if (e > 0) term *= std::pow(n_bar, e);
    sum += term;
  }
  const double log_pref = -(m + 1.0) * std::log(a) + 0.5 * (log_factorial(n) - log_factorial(m)) -
                          x / a;
  const cplx kpow = k == 0 ? cplx(1.0, 0.0) : std::pow(kappa, k);
  return std::exp(log_pref) * sum * kpow;
}

ComplexMatrix displaced_thermal_matrix(int size, cplx kappa, double n_bar) {
  ComplexMatrix out(size, size);
  for (int m = 0; m < size; ++m)
    for (int n = 0; n <= m; ++n) {
      out(m, n) = displaced_thermal_element(m, n, kappa, n_bar);
      out(n, m) = std::conj(out(m, n));
    }
  return out;
}

ComplexMatrix region_operator(int z, const ProtocolSpec& spec, const DisplacedBasis& basis,
                              int signal) {
  spec.validate();
  if (signal < 0 || signal >= basis.num_signals())
    throw DimensionError("region_operator: signal index out of range");
  const auto [th_lo, th_hi] = key_sector(z, spec.delta_p);
  const int levels = basis.block_size();
  const cplx beta = basis.beta(signal);
  if (spec.detector.kind == DetectorKind::ideal) {
    const double r_hi = radial_upper_limit(std::abs(beta), 0.0);
    return integrate_sector(spec.delta_a, r_hi, th_lo, th_hi, beta, levels,
                            coherent_accumulator(levels));
  }
  const double n_bar = spec.detector.thermal_mean();
  const double r_lo = spec.delta_a / std::sqrt(spec.detector.eta_d);
  const double r_hi = radial_upper_limit(std::abs(beta), n_bar);
  return integrate_sector(r_lo, r_hi, th_lo, th_hi, beta, levels,
                          thermal_accumulator(levels, n_bar));
}

ObservableSet observable_matrices(const ProtocolSpec& spec, const DisplacedBasis& basis) {
  if (spec.num_signals() != basis.num_signals())
    throw DimensionError("observable_matrices: protocol and basis disagree on d");
  ObservableSet out;
  const int dim = basis.dim();
  for (int i = 0; i < basis.num_signals(); ++i) {
    ComplexMatrix n_op = ComplexMatrix::Zero(dim, dim);
    ComplexMatrix nsq_op = ComplexMatrix::Zero(dim, dim);
    for (int n = 0; n <= basis.cutoff(); ++n) {
      n_op(basis.index(i, n), basis.index(i, n)) = static_cast<double>(n);
      nsq_op(basis.index(i, n), basis.index(i, n)) = static_cast<double>(n) * n;
    }
    out.n_obs.push_back(std::move(n_op));
    out.nsq_obs.push_back(std::move(nsq_op));
  }
  return out;
}

NoisyObservableReport noisy_observable_check(double eta_d, double nu_el, int truncation) {
  if (truncation < 2) throw SpecError("noisy_observable_check: truncation must be at least 2");
  DetectorModel{DetectorKind::trusted, eta_d, nu_el}.validate();
  using ld = long double;
  const ld eta = eta_d;
  const ld nu = nu_el;
  const ld nb = (1.0L - eta + nu) / eta;
  const ld a = 1.0L + nb;
  // Exact in long double for the arguments used here (k <= truncation + 2).
  auto fact = [](int k) {
    ld f = 1.0L;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  // integral_0^inf x^p K_n(x) dx with K_n the diagonal displaced-thermal kernel.
  auto moment = [&](int n, int p) {
    ld acc = 0.0L;
    for (int j = 0; j <= n; ++j) {
      const int e = n - j;
      const ld binom = fact(n) / (fact(e) * fact(n - e));
      const ld nb_pow = e == 0 ? 1.0L : std::pow(nb, static_cast<ld>(e));
      acc += binom * nb_pow * (fact(p + j) / fact(j)) * std::pow(a, static_cast<ld>(p - n));
    }
    return acc;
  };
  NoisyObservableReport rep;
  for (int n = 0; n <= truncation; ++n) {
    const ld m0 = moment(n, 0);
    const ld m1 = moment(n, 1);
    const ld m2 = moment(n, 2);
    const ld lhs_n = eta * m1 - m0;
    const ld lhs_nsq = eta * eta * m2 - 3.0L * eta * m1 + m0;
    const ld nn = n;
    const ld rhs_n = eta * nn + nu;
    const ld rhs_nsq = eta * eta * nn * nn + eta * (4.0L * nu + 1.0L - eta) * nn +
                       (2.0L * nu * nu + nu);
    rep.max_deviation_n =
        std::max(rep.max_deviation_n, static_cast<double>(std::fabs(lhs_n - rhs_n)));
    rep.max_deviation_nsq =
        std::max(rep.max_deviation_nsq, static_cast<double>(std::fabs(lhs_nsq - rhs_nsq)));
  }
  return rep;
}

ComplexMatrix reduced_state_target(const ProtocolSpec& spec) {
  spec.validate();
  const int d = spec.num_signals();
  ComplexMatrix tau(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      tau(i, j) = std::sqrt(spec.p[static_cast<std::size_t>(i)] * spec.p[static_cast<std::size_t>(j)]) *
                  coherent_overlap(spec.alpha[static_cast<std::size_t>(i)],
                                   spec.alpha[static_cast<std::size_t>(j)]);
  return hermitian_part(tau);
}

OperatorSet build_operator_set(const ProtocolSpec& spec, const DisplacedBasis& basis) {
  spec.validate();
  if (spec.num_signals() != basis.num_signals())
    throw DimensionError("build_operator_set: protocol and basis disagree on d");
  OperatorSet ops;
  for (int z = 0; z < kNumKeySymbols; ++z) {
    std::vector<ComplexMatrix> blocks;
    for (int i = 0; i < basis.num_signals(); ++i)
      blocks.push_back(region_operator(z, spec, basis, i));
    ops.regions.push_back(block_diagonal(blocks));
  }
  ops.observables = observable_matrices(spec, basis);
  ops.tau_a = reduced_state_target(spec);
  return ops;
}

}  // namespace cvqkd
