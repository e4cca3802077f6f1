// Compiled with -mavx2 -mfma; only reached through the runtime dispatch below
// or by callers that have checked avx2_available().

#include <immintrin.h>

#include <cmath>

#include "cvqkd/kernels.hpp"

namespace cvqkd::kernels {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void coherent_vectors_avx2(const double* kappa_re, const double* kappa_im, std::size_t count,
                           int levels, double* out_re, double* out_im) {
  if (levels <= 0) return;
  for (std::size_t k = 0; k < count; ++k) {
    const double kr = kappa_re[k];
    const double ki = kappa_im[k];
    out_re[k] = std::exp(-0.5 * (kr * kr + ki * ki));
    out_im[k] = 0.0;
  }
  const std::size_t packed = count & ~static_cast<std::size_t>(3);
  for (int m = 0; m + 1 < levels; ++m) {
    const double s = 1.0 / std::sqrt(static_cast<double>(m + 1));
    const __m256d vs = _mm256_set1_pd(s);
    const double* pr = out_re + static_cast<std::size_t>(m) * count;
    const double* pi = out_im + static_cast<std::size_t>(m) * count;
    double* nr = out_re + static_cast<std::size_t>(m + 1) * count;
    double* ni = out_im + static_cast<std::size_t>(m + 1) * count;
    std::size_t k = 0;
    for (; k < packed; k += 4) {
      const __m256d kr = _mm256_mul_pd(_mm256_loadu_pd(kappa_re + k), vs);
      const __m256d ki = _mm256_mul_pd(_mm256_loadu_pd(kappa_im + k), vs);
      const __m256d ar = _mm256_loadu_pd(pr + k);
      const __m256d ai = _mm256_loadu_pd(pi + k);
      _mm256_storeu_pd(nr + k, _mm256_sub_pd(_mm256_mul_pd(ar, kr), _mm256_mul_pd(ai, ki)));
      _mm256_storeu_pd(ni + k, _mm256_add_pd(_mm256_mul_pd(ar, ki), _mm256_mul_pd(ai, kr)));
    }
    for (; k < count; ++k) {
      const double kr = kappa_re[k] * s;
      const double ki = kappa_im[k] * s;
      nr[k] = pr[k] * kr - pi[k] * ki;
      ni[k] = pr[k] * ki + pi[k] * kr;
    }
  }
}

void accumulate_outer_avx2(const double* v_re, const double* v_im, const double* weights,
                           std::size_t count, int levels, std::complex<double>* h) {
  const std::size_t packed = count & ~static_cast<std::size_t>(3);
  for (int n = 0; n < levels; ++n) {
    const double* bn_re = v_re + static_cast<std::size_t>(n) * count;
    const double* bn_im = v_im + static_cast<std::size_t>(n) * count;
    for (int m = n; m < levels; ++m) {
      const double* am_re = v_re + static_cast<std::size_t>(m) * count;
      const double* am_im = v_im + static_cast<std::size_t>(m) * count;
      __m256d acc_re = _mm256_setzero_pd();
      __m256d acc_im = _mm256_setzero_pd();
      std::size_t k = 0;
      for (; k < packed; k += 4) {
        const __m256d w = _mm256_loadu_pd(weights + k);
        const __m256d wr = _mm256_mul_pd(w, _mm256_loadu_pd(bn_re + k));
        const __m256d wi = _mm256_mul_pd(w, _mm256_loadu_pd(bn_im + k));
        const __m256d ar = _mm256_loadu_pd(am_re + k);
        const __m256d ai = _mm256_loadu_pd(am_im + k);
        acc_re = _mm256_fmadd_pd(ar, wr, _mm256_fmadd_pd(ai, wi, acc_re));
        acc_im = _mm256_fmadd_pd(ai, wr, _mm256_fnmadd_pd(ar, wi, acc_im));
      }
      double sr = hsum(acc_re);
      double si = hsum(acc_im);
      for (; k < count; ++k) {
        const double wr = weights[k] * bn_re[k];
        const double wi = weights[k] * bn_im[k];
        sr += am_re[k] * wr + am_im[k] * wi;
        si += am_im[k] * wr - am_re[k] * wi;
      }
      h[static_cast<std::size_t>(n) * levels + m] += std::complex<double>(sr, si);
    }
  }
}

}  // namespace cvqkd::kernels
