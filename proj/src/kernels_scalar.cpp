#include <cmath>

#include "cvqkd/kernels.hpp"

namespace cvqkd::kernels {

void coherent_vectors_scalar(const double* kappa_re, const double* kappa_im, std::size_t count,
                             int levels, double* out_re, double* out_im) {
  if (levels <= 0) return;
  for (std::size_t k = 0; k < count; ++k) {
    const double kr = kappa_re[k];
    const double ki = kappa_im[k];
    out_re[k] = std::exp(-0.5 * (kr * kr + ki * ki));
    out_im[k] = 0.0;
  }
  for (int m = 0; m + 1 < levels; ++m) {
    const double s = 1.0 / std::sqrt(static_cast<double>(m + 1));
    const double* pr = out_re + static_cast<std::size_t>(m) * count;
    const double* pi = out_im + static_cast<std::size_t>(m) * count;
    double* nr = out_re + static_cast<std::size_t>(m + 1) * count;
    double* ni = out_im + static_cast<std::size_t>(m + 1) * count;
    for (std::size_t k = 0; k < count; ++k) {
      const double kr = kappa_re[k] * s;
      const double ki = kappa_im[k] * s;
      nr[k] = pr[k] * kr - pi[k] * ki;
      ni[k] = pr[k] * ki + pi[k] * kr;
    }
  }
}

void accumulate_outer_scalar(const double* v_re, const double* v_im, const double* weights,
                             std::size_t count, int levels, std::complex<double>* h) {
  for (int n = 0; n < levels; ++n) {
    const double* bn_re = v_re + static_cast<std::size_t>(n) * count;
    const double* bn_im = v_im + static_cast<std::size_t>(n) * count;
    for (int m = n; m < levels; ++m) {
      const double* am_re = v_re + static_cast<std::size_t>(m) * count;
      const double* am_im = v_im + static_cast<std::size_t>(m) * count;
      double acc_re = 0.0;
      double acc_im = 0.0;
      for (std::size_t k = 0; k < count; ++k) {
        const double wr = weights[k] * bn_re[k];
        const double wi = weights[k] * bn_im[k];
        acc_re += am_re[k] * wr + am_im[k] * wi;
        acc_im += am_im[k] * wr - am_re[k] * wi;
      }
      h[static_cast<std::size_t>(n) * levels + m] += std::complex<double>(acc_re, acc_im);
    }
  }
}

}  // namespace cvqkd::kernels
