#include <gtest/gtest.h>

#include <cmath>

#include "cvqkd/conic.hpp"
#include "cvqkd/dimred.hpp"
#include "test_support.hpp"

namespace cvqkd {
namespace {

ConicConstraint dense_row(int block, const ComplexMatrix& a, double rhs) {
  return {{{block, {{0, 0, a}}}}, {}, rhs};
}

// Checks X, Z >= 0, primal and dual residuals and complementarity directly.
void expect_kkt(const ConicProblem& p, const ConicSolution& s, double tol) {
  RealVector b(p.num_rows());
  for (int k = 0; k < p.num_rows(); ++k) b(k) = p.rows[static_cast<std::size_t>(k)].rhs;
  EXPECT_LT((apply_constraints(p, s.x_blocks, s.x_lp) - b).norm(), tol);
  auto [aty, aty_lp] = apply_adjoint(p, s.y);
  for (std::size_t i = 0; i < p.block_sizes.size(); ++i) {
    const ComplexMatrix z = p.c_blocks[i] - aty[i];
    EXPECT_GE(min_eigenvalue(hermitian_part(z)), -tol);
    EXPECT_GE(min_eigenvalue(s.x_blocks[i]), -tol);
    EXPECT_NEAR(real_inner(s.x_blocks[i], z), 0.0, tol);
  }
  const RealVector zl = p.c_lp - aty_lp;
  if (p.lp_size > 0) {
    EXPECT_GE(zl.minCoeff(), -tol);
    EXPECT_GE(s.x_lp.minCoeff(), -tol);
  }
}

TEST(InteriorPoint, MinimumEigenvalue) {
  std::mt19937_64 rng(5);
  for (int n : {1, 3, 7, 12}) {
    const ComplexMatrix c = testing::random_hermitian(n, rng);
    ConicProblem p;
    p.block_sizes = {n};
    p.c_blocks = {c};
    p.c_lp = RealVector(0);
    p.rows = {dense_row(0, ComplexMatrix::Identity(n, n), 1.0)};
    const ConicSolution s = InteriorPointAdapter().submit(p, {});
    ASSERT_TRUE(s.optimal()) << status_name(s.status);
    EXPECT_NEAR(s.primal_objective, min_eigenvalue(c), 1e-8);
    EXPECT_NEAR(s.y(0), min_eigenvalue(c), 1e-8);
    expect_kkt(p, s, 1e-7);
  }
}

TEST(InteriorPoint, LinearProgramVertexOptimum) {
  // min -x0 - 2 x1 s.t. x0 + x1 + s0 = 4, x0 + 3 x1 + s1 = 6; optimum (3, 1) with value -5.
  ConicProblem p;
  p.lp_size = 4;
  p.c_lp = RealVector(4);
  p.c_lp << -1, -2, 0, 0;
  p.rows = {{{}, {{0, 1.0}, {1, 1.0}, {2, 1.0}}, 4.0}, {{}, {{0, 1.0}, {1, 3.0}, {3, 1.0}}, 6.0}};
  const ConicSolution s = InteriorPointAdapter().submit(p, {1e-10, 100});
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.primal_objective, -5.0, 1e-8);
  EXPECT_NEAR(s.x_lp(0), 3.0, 1e-6);
  EXPECT_NEAR(s.x_lp(1), 1.0, 1e-6);
  expect_kkt(p, s, 1e-7);
}

TEST(InteriorPoint, MixedBlockAndOrthant) {
  std::mt19937_64 rng(6);
  for (double c_lp : {-3.0, 0.0, 3.0}) {
    const ComplexMatrix c = testing::random_hermitian(4, rng);
    ConicProblem p;
    p.block_sizes = {4};
    p.c_blocks = {c};
    p.lp_size = 1;
    p.c_lp = RealVector::Constant(1, c_lp);
    p.rows = {{{{0, {{0, 0, ComplexMatrix::Identity(4, 4)}}}}, {{0, 1.0}}, 1.0}};
    const ConicSolution s = InteriorPointAdapter().submit(p, {});
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.primal_objective, std::min(min_eigenvalue(c), c_lp), 1e-8);
  }
}

TEST(InteriorPoint, UnitDiagonalSdp) {
  std::mt19937_64 rng(8);
  const int n = 6;
  const ComplexMatrix c = testing::random_hermitian(n, rng);
  ConicProblem p;
  p.block_sizes = {n};
  p.c_blocks = {c};
  p.c_lp = RealVector(0);
  for (int i = 0; i < n; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(1, 1);
    e(0, 0) = 1.0;
    p.rows.push_back({{{0, {{i, i, e}}}}, {}, 1.0});
  }
  const ConicSolution s = InteriorPointAdapter().submit(p, {});
  ASSERT_TRUE(s.optimal());
  expect_kkt(p, s, 1e-7);
  EXPECT_NEAR(s.primal_objective, s.dual_objective, 1e-8);
  // Any unit-diagonal PSD point bounds the optimum from above.
  EXPECT_LE(s.primal_objective, c.trace().real() + 1e-9);
}

TEST(InteriorPoint, PatchedAndDenseRowsAgree) {
  std::mt19937_64 rng(9);
  const int tile = 3, n = 9;
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  a.block(0, 3, 3, 3) = testing::random_matrix(3, 3, rng);
  a.block(3, 0, 3, 3) = a.block(0, 3, 3, 3).adjoint();
  a.block(6, 6, 3, 3) = testing::random_hermitian(3, rng);
  const ComplexMatrix c = testing::random_hermitian(n, rng);
  auto make = [&](bool patched) {
    ConicProblem p;
    p.block_sizes = {n};
    p.c_blocks = {c};
    p.c_lp = RealVector(0);
    p.rows.push_back(dense_row(0, ComplexMatrix::Identity(n, n), 1.0));
    if (patched)
      p.rows.push_back({{{0, tile_patches(a, tile)}}, {}, 0.1});
    else
      p.rows.push_back(dense_row(0, a, 0.1));
    return p;
  };
  EXPECT_EQ(tile_patches(a, tile).size(), 3u);
  const ConicSolution s1 = InteriorPointAdapter().submit(make(true), {});
  const ConicSolution s2 = InteriorPointAdapter().submit(make(false), {});
  ASSERT_TRUE(s1.optimal());
  ASSERT_TRUE(s2.optimal());
  EXPECT_NEAR(s1.primal_objective, s2.primal_objective, 1e-8);
}

TEST(InteriorPoint, RejectsMalformedProblems) {
  ConicProblem p;
  p.block_sizes = {2};
  p.c_blocks = {ComplexMatrix::Zero(3, 3)};
  p.c_lp = RealVector(0);
  EXPECT_THROW(InteriorPointAdapter().submit(p, {}), DimensionError);
  p.c_blocks = {ComplexMatrix::Zero(2, 2)};
  p.rows = {{{{0, {{1, 1, ComplexMatrix::Identity(2, 2)}}}}, {}, 1.0}};
  EXPECT_THROW(InteriorPointAdapter().submit(p, {}), DimensionError);
  EXPECT_THROW(tile_patches(ComplexMatrix::Zero(4, 4), 3), DimensionError);
}

// max Tr(rho Pbar) over Fock-diagonal rho with fixed <n>, <n^2>, trace one:
// the truncated primal weight SDP, solved numerically against the closed form.
double weight_sdp(double mean, double second, int cutoff, int trunc) {
  const int n = trunc + 1;
  ConicProblem p;
  p.block_sizes = {n};
  ComplexMatrix c = ComplexMatrix::Zero(n, n), num = c, sq = c;
  for (int k = 0; k < n; ++k) {
    if (k > cutoff) c(k, k) = -1.0;
    num(k, k) = k;
    sq(k, k) = double(k) * k;
  }
  p.c_blocks = {c};
  p.c_lp = RealVector(0);
  p.rows = {{{{0, tile_patches(ComplexMatrix::Identity(n, n), 1)}}, {}, 1.0},
            {{{0, tile_patches(num, 1)}}, {}, mean},
            {{{0, tile_patches(sq, 1)}}, {}, second}};
  const ConicSolution s = InteriorPointAdapter().submit(p, {1e-12, 200});
  EXPECT_TRUE(s.optimal()) << status_name(s.status) << " after " << s.iterations;
  return -s.primal_objective;
}

TEST(InteriorPoint, WeightSdpMatchesClosedForm) {
  // The full grid runs in the acceptance binary; two corners keep this suite fast.
  for (auto [delta, cutoff] : {std::pair{0.005, 20}, std::pair{0.02, 5}}) {
    const double mean = delta / 2.0, second = delta * (1.0 + delta) / 2.0;
    const WeightBound wb = weight_bound_dmcv({mean}, {second}, {1.0}, cutoff);
    EXPECT_NEAR(weight_sdp(mean, second, cutoff, 200), wb.W, 1e-9) << delta << " " << cutoff;
  }
}

}  // namespace
}  // namespace cvqkd
