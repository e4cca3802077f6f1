#pragma once

// Hot loops of the phase-space quadrature. Each kernel has a portable scalar
// reference and an AVX2/FMA variant; the dispatching entry points pick the
// AVX2 one when the CPU supports it. Both variants are exported so tests can
// compare them directly.
//
// Layout: node arrays are structure-of-arrays. Coherent vectors are stored
// m-major, out[m * count + k] = <m|kappa_k>.

#include <complex>
#include <cstddef>

namespace cvqkd::kernels {

enum class Isa { scalar, avx2 };

bool avx2_available();
Isa active_isa();
const char* isa_name(Isa isa);

/// <m|kappa_k> = exp(-|kappa_k|^2/2) kappa_k^m / sqrt(m!) for m < levels.
void coherent_vectors_scalar(const double* kappa_re, const double* kappa_im, std::size_t count,
                             int levels, double* out_re, double* out_im);
void coherent_vectors_avx2(const double* kappa_re, const double* kappa_im, std::size_t count,
                           int levels, double* out_re, double* out_im);
void coherent_vectors(const double* kappa_re, const double* kappa_im, std::size_t count,
                      int levels, double* out_re, double* out_im);

/// h(m, n) += sum_k w_k v_{m,k} conj(v_{n,k}) for m >= n. `h` is a column-major
/// levels x levels complex matrix; only the lower triangle is touched.
void accumulate_outer_scalar(const double* v_re, const double* v_im, const double* weights,
                             std::size_t count, int levels, std::complex<double>* h);
void accumulate_outer_avx2(const double* v_re, const double* v_im, const double* weights,
                           std::size_t count, int levels, std::complex<double>* h);
void accumulate_outer(const double* v_re, const double* v_im, const double* weights,
                      std::size_t count, int levels, std::complex<double>* h);

}  // namespace cvqkd::kernels
