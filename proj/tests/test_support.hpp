#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cvqkd/linalg.hpp"

namespace cvqkd::testing {

inline ComplexMatrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline ComplexMatrix random_hermitian(int n, std::mt19937_64& rng) {
  const ComplexMatrix a = random_matrix(n, n, rng);
  return 0.5 * (a + a.adjoint());
}

/// Random density matrix of full rank with unit trace.
inline ComplexMatrix random_density(int n, std::mt19937_64& rng) {
  const ComplexMatrix a = random_matrix(n, n, rng);
  ComplexMatrix r = a * a.adjoint() + 0.05 * ComplexMatrix::Identity(n, n);
  return r / r.trace().real();
}

/// exp(gamma a^dagger - gamma^* a) on Fock levels 0..size-1, by diagonalising
/// the Hermitian generator. Accurate away from the truncation edge.
inline ComplexMatrix brute_displacement(int size, cplx gamma) {
  ComplexMatrix a = ComplexMatrix::Zero(size, size);
  for (int n = 1; n < size; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const ComplexMatrix gen = gamma * a.adjoint() - std::conj(gamma) * a;
  const ComplexMatrix h = cplx(0.0, 1.0) * gen;  // Hermitian
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()));
  Eigen::VectorXcd ph(size);
  for (int k = 0; k < size; ++k) ph(k) = std::exp(cplx(0.0, -es.eigenvalues()(k)));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

/// Coherent-state Fock amplitudes e^{-|a|^2/2} a^n / sqrt(n!).
inline ComplexVector coherent_amplitudes(int size, cplx alpha) {
  ComplexVector v(size);
  cplx c = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < size; ++n) {
    v(n) = c;
    c *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  return v;
}

// Random four-outcome POVM on C^n: P_z = S^{-1/2} A_z S^{-1/2} with S = sum A_z.
inline std::vector<ComplexMatrix> random_povm(int n, std::mt19937_64& rng) {
  std::vector<ComplexMatrix> a;
  ComplexMatrix s = ComplexMatrix::Zero(n, n);
  for (int z = 0; z < 4; ++z) {
    const ComplexMatrix g = random_matrix(n, n, rng);
    a.push_back(g * g.adjoint());
    s += a.back();
  }
  const ComplexMatrix s_inv_half = apply_spectral(s, [](double x) { return 1.0 / std::sqrt(x); });
  for (auto& m : a) m = hermitian_part(s_inv_half * m * s_inv_half);
  return a;
}

inline double entropy_bits(const ComplexMatrix& m) {
  const RealVector ev = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(hermitian_part(m)).eigenvalues();
  double s = 0.0;
  for (double x : ev)
    if (x > 0.0) s -= x * std::log2(x);
  return s;
}

// H(Z|E) from an explicit purification sum_k sqrt(l_k) |v_k>|k>_E: after the
// key measurement, E holds sigma_z(k, l) = sqrt(l_k l_l) <v_l|P_z|v_k>, and
// H(Z|E) = sum_z S(sigma_z) - S(sum_z sigma_z).
inline double purification_oracle(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& regions) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
  const Eigen::Index n = rho.rows();
  ComplexMatrix total = ComplexMatrix::Zero(n, n);
  double out = 0.0;
  for (const auto& pz : regions) {
    ComplexMatrix sigma(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index l = 0; l < n; ++l)
        sigma(k, l) = std::sqrt(std::max(es.eigenvalues()(k), 0.0) * std::max(es.eigenvalues()(l), 0.0)) *
                      es.eigenvectors().col(l).dot(pz * es.eigenvectors().col(k));
    out += entropy_bits(sigma);
    total += sigma;
  }
  return out - entropy_bits(total);
}

}  // namespace cvqkd::testing
