#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cvqkd/linalg.hpp"

namespace cvqkd {

/// A dense sub-block of a constraint matrix: A[row + i, col + j] = value(i, j).
/// Off-diagonal patches must be paired with their adjoint so that the sum of
/// all patches of a term is Hermitian.
struct Patch {
  int row = 0;
  int col = 0;
  ComplexMatrix value;
};

struct BlockTerm {
  int block = 0;
  std::vector<Patch> patches;
};

/// One affine equality  sum_b Re Tr(A_b X_b) + a . x_lp = rhs.
struct ConicConstraint {
  std::vector<BlockTerm> terms;
  std::vector<std::pair<int, double>> lp;
  double rhs = 0.0;
};

/// Standard-form conic program over Hermitian PSD blocks and a nonnegative
/// orthant:
///   minimise   sum_b Re Tr(C_b X_b) + c_lp . x
///   subject to A(X, x) = b,  X_b >= 0,  x >= 0.
/// Its dual is  maximise b . y  subject to  C - A^*(y) = Z >= 0.
struct ConicProblem {
  std::vector<int> block_sizes;
  int lp_size = 0;
  std::vector<ComplexMatrix> c_blocks;
  RealVector c_lp;
  std::vector<ConicConstraint> rows;

  int num_rows() const { return static_cast<int>(rows.size()); }
  void validate() const;
};

/// Splits a matrix into tile x tile patches and keeps the nonzero ones.
std::vector<Patch> tile_patches(const ComplexMatrix& m, int tile);

enum class ConicStatus { optimal, max_iterations, numerical_failure };

std::string status_name(ConicStatus s);

struct ConicOptions {
  double tol = 1e-9;
  int max_iterations = 100;
  bool verbose = false;  // one line per iteration on stderr
};

struct ConicSolution {
  ConicStatus status = ConicStatus::numerical_failure;
  std::vector<ComplexMatrix> x_blocks;
  RealVector x_lp;
  RealVector y;
  std::vector<ComplexMatrix> z_blocks;
  RealVector z_lp;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;  // ||A(X) - b|| / (1 + ||b||)
  double dual_residual = 0.0;    // ||C - Z - A^*(y)|| / (1 + ||C||)
  double relative_gap = 0.0;
  int iterations = 0;

  bool optimal() const { return status == ConicStatus::optimal; }
};

/// Narrow interface so that alternative conic back ends can be swapped in.
/// Implementations must be safe to call concurrently from several threads.
class ConicSolverAdapter {
public:
  virtual ~ConicSolverAdapter() = default;
  virtual std::string name() const = 0;
  virtual ConicSolution submit(const ConicProblem& problem, const ConicOptions& options) const = 0;
};

/// Infeasible-start primal-dual path following with the HKM direction and
/// Mehrotra's predictor-corrector.
class InteriorPointAdapter final : public ConicSolverAdapter {
public:
  std::string name() const override { return "hkm-ipm"; }
  ConicSolution submit(const ConicProblem& problem, const ConicOptions& options) const override;
};

/// The adapter used when callers do not supply one.
std::shared_ptr<const ConicSolverAdapter> default_conic_adapter();

/// Evaluates A(X, x) for a problem (no scaling).
RealVector apply_constraints(const ConicProblem& problem, const std::vector<ComplexMatrix>& x_blocks,
                             const RealVector& x_lp);

/// Evaluates A^*(y) blockwise.
std::pair<std::vector<ComplexMatrix>, RealVector> apply_adjoint(const ConicProblem& problem,
                                                                const RealVector& y);

}  // namespace cvqkd
