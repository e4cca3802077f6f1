#include "cvqkd/kernels.hpp"

namespace cvqkd::kernels {

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Isa active_isa() { return avx2_available() ? Isa::avx2 : Isa::scalar; }

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void coherent_vectors(const double* kappa_re, const double* kappa_im, std::size_t count,
                      int levels, double* out_re, double* out_im) {
  if (avx2_available())
    coherent_vectors_avx2(kappa_re, kappa_im, count, levels, out_re, out_im);
  else
    coherent_vectors_scalar(kappa_re, kappa_im, count, levels, out_re, out_im);
}

void accumulate_outer(const double* v_re, const double* v_im, const double* weights,
                      std::size_t count, int levels, std::complex<double>* h) {
  if (avx2_available())
    accumulate_outer_avx2(v_re, v_im, weights, count, levels, h);
  else
    accumulate_outer_scalar(v_re, v_im, weights, count, levels, h);
}

}  // namespace cvqkd::kernels
