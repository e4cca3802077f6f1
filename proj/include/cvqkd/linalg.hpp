#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cvqkd {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Thrown when operand shapes do not match what an operation expects.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine cannot produce a trustworthy result.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Largest elementwise |M - M^dagger|.
double hermitian_defect(const ComplexMatrix& m);

/// Returns (M + M^dagger)/2 when the asymmetry is below `tol` (scaled by
/// max(1, max|M_ij|)); throws NumericalError otherwise.
ComplexMatrix enforce_hermitian(const ComplexMatrix& m, double tol = 1e-10);

/// (M + M^dagger)/2 without any check.
inline ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

/// Re Tr(A^dagger B), the real Hilbert-Schmidt inner product.
inline double real_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

/// Tr(A^dagger B).
inline cplx hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum();
}

struct HermitianEigen {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // columns
};

HermitianEigen eigh(const ComplexMatrix& h);

double min_eigenvalue(const ComplexMatrix& h);
double max_eigenvalue(const ComplexMatrix& h);

/// V f(Lambda) V^dagger for a Hermitian argument.
ComplexMatrix apply_spectral(const ComplexMatrix& h, const std::function<double(double)>& f);

/// Square root of a PSD matrix; eigenvalues below zero are clipped.
ComplexMatrix sqrtm_psd(const ComplexMatrix& h);

/// Natural log with eigenvalues replaced by max(lambda, floor) inside the log.
ComplexMatrix logm_floored(const ComplexMatrix& h, double floor);

/// sum_i lambda_i * log2(max(lambda_i, floor)); the floor only enters the log.
double trace_xlogx_bits(const RealVector& eigenvalues, double floor);

/// Block-diagonal direct sum.
ComplexMatrix block_diagonal(const std::vector<ComplexMatrix>& blocks);

}  // namespace cvqkd
