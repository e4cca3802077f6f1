#pragma once

// Linear algebra over truncated displaced Fock bases.
//
// The working basis is {|i>_A (x) |n_{beta_i}>_B}, i = 0..d-1, n = 0..N, with
// |n_beta> = D(beta)|n>. Indices are i-major: index = i*(N+1) + n. Because the
// B-part depends on the A-label the basis is not a tensor-product basis, so
// partial trace and its adjoint go through the overlap blocks
// G_ij(m, n) = <n_{beta_j}|m_{beta_i}>.

#include <vector>

#include "cvqkd/linalg.hpp"

namespace cvqkd {

class DisplacedBasis {
public:
  DisplacedBasis(std::vector<cplx> beta, int cutoff);

  int num_signals() const { return static_cast<int>(beta_.size()); }
  int cutoff() const { return cutoff_; }
  int block_size() const { return cutoff_ + 1; }
  int dim() const { return num_signals() * block_size(); }
  int index(int signal, int n) const { return signal * block_size() + n; }
  const std::vector<cplx>& beta() const { return beta_; }
  cplx beta(int i) const { return beta_.at(static_cast<std::size_t>(i)); }

private:
  std::vector<cplx> beta_;
  int cutoff_;
};

/// <alpha_j|alpha_i> = exp(i Im(alpha_i alpha_j^*) - |alpha_i - alpha_j|^2 / 2).
cplx coherent_overlap(cplx alpha_i, cplx alpha_j);

/// <n|D(gamma)|m> in the Fock basis, evaluated through an associated Laguerre
/// polynomial with log-space factorial prefactors.
cplx displacement_element(int n, int m, cplx gamma);

/// Matrix [<n|D(gamma)|m>]_{n,m} for n, m in 0..size-1.
ComplexMatrix displacement_matrix(int size, cplx gamma);

/// Overlap blocks G_ij between the displaced bases of two signals. Immutable
/// after construction; safe to share across threads.
class GramRelation {
public:
  GramRelation(int num_signals, int block_size, std::vector<ComplexMatrix> blocks,
               double max_singular_value);

  int num_signals() const { return num_signals_; }
  int block_size() const { return block_size_; }
  int dim() const { return num_signals_ * block_size_; }

  /// G_ij with entries (m, n) = <n_{beta_j}|m_{beta_i}>.
  const ComplexMatrix& block(int i, int j) const {
    return blocks_[static_cast<std::size_t>(i * num_signals_ + j)];
  }

  /// Largest singular value over all blocks; a truncated unitary never exceeds 1.
  double max_singular_value() const { return max_singular_value_; }

private:
  int num_signals_;
  int block_size_;
  std::vector<ComplexMatrix> blocks_;
  double max_singular_value_;
};

/// Builds every G_ij. Throws NumericalError when a block's largest singular
/// value exceeds 1 + 1e-8 (lost precision for widely separated amplitudes).
GramRelation build_gram_relation(const DisplacedBasis& basis);

/// <i|rho_A|j> = sum_{mn} (rho_ij)_{mn} (G_ij)_{mn}.
ComplexMatrix partial_trace_displaced(const ComplexMatrix& m_rho, const GramRelation& rel);

/// sigma_A (x) 1_B written in the displaced basis: block (i,j) is c_ij conj(G_ij).
ComplexMatrix embed_operator_A(const ComplexMatrix& sigma_a, const GramRelation& rel);

}  // namespace cvqkd
