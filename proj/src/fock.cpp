#include "cvqkd/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cvqkd {

DisplacedBasis::DisplacedBasis(std::vector<cplx> beta, int cutoff)
    : beta_(std::move(beta)), cutoff_(cutoff) {
  if (beta_.empty()) throw DimensionError("DisplacedBasis: need at least one signal");
  if (cutoff_ < 0) throw DimensionError("DisplacedBasis: cutoff must be non-negative");
}

cplx coherent_overlap(cplx alpha_i, cplx alpha_j) {
  const double im = std::imag(alpha_i * std::conj(alpha_j));
  return std::exp(cplx(-0.5 * std::norm(alpha_i - alpha_j), im));
}

namespace {

// Generalized Laguerre L_n^{(k)}(x) by three-term recurrence.
double laguerre(int n, int k, double x) {
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + k - x;
  for (int j = 1; j < n; ++j) {
    const double next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

// <hi|D(g)|lo> for hi >= lo, where g carries the sign convention of the caller.
cplx displacement_lower(int hi, int lo, cplx g) {
  const int k = hi - lo;
  const double x = std::norm(g);
  if (x == 0.0) return k == 0 ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
  const double lag = laguerre(lo, k, x);
  if (lag == 0.0) return {0.0, 0.0};
  const double log_mag = 0.5 * (std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0)) +
                         k * 0.5 * std::log(x) - 0.5 * x + std::log(std::abs(lag));
  const double sign = lag < 0.0 ? -1.0 : 1.0;
  return std::polar(sign * std::exp(log_mag), k * std::arg(g));
}

}  // namespace

cplx displacement_element(int n, int m, cplx gamma) {
  if (n < 0 || m < 0) throw DimensionError("displacement_element: negative Fock index");
  if (n >= m) return displacement_lower(n, m, gamma);
  return displacement_lower(m, n, -std::conj(gamma));
}

ComplexMatrix displacement_matrix(int size, cplx gamma) {
  if (size < 0) throw DimensionError("displacement_matrix: negative size");
  ComplexMatrix d(size, size);
  for (int n = 0; n < size; ++n)
    for (int m = 0; m < size; ++m) d(n, m) = displacement_element(n, m, gamma);
  return d;
}

GramRelation::GramRelation(int num_signals, int block_size, std::vector<ComplexMatrix> blocks,
                           double max_singular_value)
    : num_signals_(num_signals),
      block_size_(block_size),
      blocks_(std::move(blocks)),
      max_singular_value_(max_singular_value) {
  if (blocks_.size() != static_cast<std::size_t>(num_signals_ * num_signals_))
    throw DimensionError("GramRelation: expected d*d blocks");
  for (const auto& b : blocks_)
    if (b.rows() != block_size_ || b.cols() != block_size_)
      throw DimensionError("GramRelation: block has wrong size");
}

GramRelation build_gram_relation(const DisplacedBasis& basis) {
  const int d = basis.num_signals();
  const int s = basis.block_size();
  std::vector<ComplexMatrix> blocks(static_cast<std::size_t>(d * d));
  double smax = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      ComplexMatrix g(s, s);
      if (i == j) {
        g.setIdentity();
      } else {
        const cplx bi = basis.beta(i);
        const cplx bj = basis.beta(j);
        const cplx phase = std::exp(cplx(0.0, std::imag(-bj * std::conj(bi))));
        const cplx shift = bi - bj;
        for (int m = 0; m < s; ++m)
          for (int n = 0; n < s; ++n) g(m, n) = phase * displacement_element(n, m, shift);
        const double sv = Eigen::JacobiSVD<ComplexMatrix>(g).singularValues()(0);
        if (sv > 1.0 + 1e-8) {
          std::ostringstream os;
          os << "Gram block (" << i << "," << j << ") has singular value " << sv
             << " > 1; displacement elements lost precision";
          throw NumericalError(os.str());
        }
        smax = std::max(smax, sv);
      }
      if (i == j) smax = std::max(smax, 1.0);
      blocks[static_cast<std::size_t>(i * d + j)] = std::move(g);
    }
  }
  return GramRelation(d, s, std::move(blocks), smax);
}

ComplexMatrix partial_trace_displaced(const ComplexMatrix& m_rho, const GramRelation& rel) {
  if (m_rho.rows() != rel.dim() || m_rho.cols() != rel.dim())
    throw DimensionError("partial_trace_displaced: operator size does not match basis");
  const int d = rel.num_signals();
  const int s = rel.block_size();
  ComplexMatrix out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      out(i, j) = m_rho.block(i * s, j * s, s, s).cwiseProduct(rel.block(i, j)).sum();
  return out;
}

ComplexMatrix embed_operator_A(const ComplexMatrix& sigma_a, const GramRelation& rel) {
  const int d = rel.num_signals();
  const int s = rel.block_size();
  if (sigma_a.rows() != d || sigma_a.cols() != d)
    throw DimensionError("embed_operator_A: operator size does not match number of signals");
  ComplexMatrix out(rel.dim(), rel.dim());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      out.block(i * s, j * s, s, s) = sigma_a(i, j) * rel.block(i, j).conjugate();
  return out;
}

}  // namespace cvqkd
