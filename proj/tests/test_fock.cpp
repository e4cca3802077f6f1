#include <gtest/gtest.h>

#include <random>

#include "cvqkd/fock.hpp"
#include "test_support.hpp"

namespace cvqkd {
namespace {

using testing::brute_displacement;
using testing::coherent_amplitudes;
using testing::random_density;
using testing::random_hermitian;

TEST(CoherentOverlap, IdenticalStatesHaveUnitOverlap) {
  const cplx a(0.7, -0.3);
  EXPECT_NEAR(std::abs(coherent_overlap(a, a) - cplx(1.0, 0.0)), 0.0, 1e-15);
}

TEST(CoherentOverlap, MatchesTruncatedFockSeries) {
  const cplx ai(0.6, 0.0);
  const cplx aj(0.0, 0.0);
  const cplx series = coherent_amplitudes(60, aj).dot(coherent_amplitudes(60, ai));
  EXPECT_NEAR(std::abs(coherent_overlap(ai, aj) - series), 0.0, 1e-14);
  EXPECT_NEAR(coherent_overlap(ai, aj).real(), 0.835270211411272, 1e-12);

  const cplx bi(0.4, 0.9);
  const cplx bj(-0.5, 0.2);
  const cplx s2 = coherent_amplitudes(60, bj).dot(coherent_amplitudes(60, bi));
  EXPECT_NEAR(std::abs(coherent_overlap(bi, bj) - s2), 0.0, 1e-13);
}

TEST(CoherentOverlap, HermitianSymmetryAndMagnitude) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const cplx a(g(rng), g(rng));
    const cplx b(g(rng), g(rng));
    EXPECT_NEAR(std::abs(coherent_overlap(a, b) - std::conj(coherent_overlap(b, a))), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(coherent_overlap(a, b)), std::exp(-0.5 * std::norm(a - b)), 1e-12);
  }
}

TEST(DisplacementElement, ZeroDisplacementIsIdentity) {
  for (int n = 0; n < 8; ++n)
    for (int m = 0; m < 8; ++m)
      EXPECT_EQ(displacement_element(n, m, 0.0), cplx(n == m ? 1.0 : 0.0, 0.0));
}

TEST(DisplacementElement, VacuumToVacuum) {
  const cplx g(0.8, -0.45);
  EXPECT_NEAR(std::abs(displacement_element(0, 0, g) - std::exp(-0.5 * std::norm(g))), 0.0,
              1e-15);
  const cplx series = coherent_amplitudes(60, g)(0);
  EXPECT_NEAR(std::abs(displacement_element(0, 0, g) - series), 0.0, 1e-15);
}

TEST(DisplacementElement, MatchesExponentiatedGenerator) {
  const cplx g(0.9, 0.6);
  const ComplexMatrix oracle = brute_displacement(140, g);
  for (int n = 0; n < 20; ++n)
    for (int m = 0; m < 20; ++m)
      EXPECT_NEAR(std::abs(displacement_element(n, m, g) - oracle(n, m)), 0.0, 1e-11)
          << n << "," << m;
}

TEST(DisplacementElement, ColumnZeroIsCoherentState) {
  const cplx g(-1.2, 0.3);
  const ComplexVector c = coherent_amplitudes(30, g);
  for (int n = 0; n < 30; ++n) EXPECT_NEAR(std::abs(displacement_element(n, 0, g) - c(n)), 0.0, 1e-14);
}

TEST(DisplacementElement, LargeIndicesStayFinite) {
  const cplx v = displacement_element(200, 180, cplx(2.0, 1.0));
  EXPECT_TRUE(std::isfinite(v.real()) && std::isfinite(v.imag()));
  EXPECT_LE(std::abs(v), 1.0);
}

TEST(DisplacementMatrix, TruncatedProductApproachesIdentity) {
  const ComplexMatrix d = displacement_matrix(41, cplx(0.5, 0.0));
  const ComplexMatrix prod = d * d.adjoint();
  const ComplexMatrix block = prod.topLeftCorner(20, 20);
  EXPECT_LT((block - ComplexMatrix::Identity(20, 20)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(GramRelation, DiagonalBlocksAreIdentityAndAdjointPairs) {
  const DisplacedBasis basis({cplx(0.5, 0.0), cplx(0.0, 0.5), cplx(-0.5, 0.0)}, 6);
  const GramRelation rel = build_gram_relation(basis);
  for (int i = 0; i < 3; ++i) {
    EXPECT_TRUE(rel.block(i, i) == ComplexMatrix::Identity(7, 7));
    for (int j = 0; j < 3; ++j)
      EXPECT_LT((rel.block(i, j) - rel.block(j, i).adjoint()).cwiseAbs().maxCoeff(), 1e-13);
  }
  EXPECT_LE(rel.max_singular_value(), 1.0 + 1e-10);
}

TEST(GramRelation, EqualAmplitudesGiveIdentity) {
  const DisplacedBasis basis({cplx(0.3, 0.2), cplx(0.3, 0.2)}, 4);
  const GramRelation rel = build_gram_relation(basis);
  EXPECT_LT((rel.block(0, 1) - ComplexMatrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GramRelation, MatchesDisplacedFockInnerProducts) {
  const std::vector<cplx> beta = {cplx(0.1, 0.0), cplx(-0.1, 0.0)};
  const DisplacedBasis basis(beta, 5);
  const GramRelation rel = build_gram_relation(basis);
  // <n_{beta_j}|m_{beta_i}> from displaced Fock vectors at truncation 60.
  const int trunc = 60;
  const ComplexMatrix d0 = brute_displacement(trunc, beta[0]);
  const ComplexMatrix d1 = brute_displacement(trunc, beta[1]);
  for (int m = 0; m < 6; ++m)
    for (int n = 0; n < 6; ++n) {
      const cplx want = d1.col(n).dot(d0.col(m));
      EXPECT_NEAR(std::abs(rel.block(0, 1)(m, n) - want), 0.0, 1e-12);
    }
  // And against the phase-times-displacement formula evaluated element-wise.
  const cplx phase = std::exp(cplx(0.0, std::imag(-beta[1] * std::conj(beta[0]))));
  for (int m = 0; m < 6; ++m)
    for (int n = 0; n < 6; ++n)
      EXPECT_NEAR(std::abs(rel.block(0, 1)(m, n) - phase * displacement_element(n, m, beta[0] - beta[1])),
                  0.0, 1e-15);
}

// Partial trace through an explicit product basis: the displaced basis vectors
// |i> (x) D(beta_i)|n> are embedded into C^d (x) C^trunc.
ComplexMatrix brute_partial_trace(const ComplexMatrix& rho, const std::vector<cplx>& beta, int cutoff,
                                  int trunc) {
  const int d = static_cast<int>(beta.size());
  const int s = cutoff + 1;
  ComplexMatrix u = ComplexMatrix::Zero(d * trunc, d * s);
  for (int i = 0; i < d; ++i) {
    const ComplexMatrix disp = brute_displacement(trunc, beta[static_cast<std::size_t>(i)]);
    for (int n = 0; n < s; ++n) u.block(i * trunc, i * s + n, trunc, 1) = disp.col(n);
  }
  const ComplexMatrix full = u * rho * u.adjoint();
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(i, j) = full.block(i * trunc, j * trunc, trunc, trunc).trace();
  return out;
}

TEST(PartialTrace, AgreesWithProductBasisComputation) {
  std::mt19937_64 rng(11);
  const std::vector<cplx> beta = {cplx(0.4, 0.1), cplx(-0.3, 0.35)};
  const DisplacedBasis basis(beta, 2);
  const GramRelation rel = build_gram_relation(basis);
  for (int t = 0; t < 5; ++t) {
    const ComplexMatrix rho = random_density(basis.dim(), rng);
    const ComplexMatrix want = brute_partial_trace(rho, beta, 2, 30);
    EXPECT_LT((partial_trace_displaced(rho, rel) - want).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(PartialTrace, BlockDiagonalInputGivesDiagonalOutput) {
  std::mt19937_64 rng(3);
  const DisplacedBasis basis({cplx(0.6, 0.0), cplx(0.0, 0.6), cplx(-0.6, 0.0)}, 3);
  const GramRelation rel = build_gram_relation(basis);
  ComplexMatrix rho = ComplexMatrix::Zero(basis.dim(), basis.dim());
  std::vector<cplx> traces;
  for (int i = 0; i < 3; ++i) {
    const ComplexMatrix b = random_density(4, rng) * (i + 1.0);
    rho.block(4 * i, 4 * i, 4, 4) = b;
    traces.push_back(b.trace());
  }
  const ComplexMatrix ra = partial_trace_displaced(rho, rel);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(std::abs(ra(i, j) - (i == j ? traces[static_cast<std::size_t>(i)] : 0.0)), 0.0, 1e-14);
}

TEST(PartialTrace, TraceAndPositivityPreserving) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dd(1, 3), nn(0, 5);
  std::normal_distribution<double> g(0.0, 0.7);
  for (int t = 0; t < 100; ++t) {
    const int d = dd(rng);
    const int cutoff = nn(rng);
    std::vector<cplx> beta;
    for (int i = 0; i < d; ++i) beta.emplace_back(g(rng), g(rng));
    const DisplacedBasis basis(beta, cutoff);
    const GramRelation rel = build_gram_relation(basis);
    const ComplexMatrix rho = random_density(basis.dim(), rng);
    const ComplexMatrix ra = partial_trace_displaced(rho, rel);
    EXPECT_NEAR(std::abs(ra.trace() - rho.trace()), 0.0, 1e-12);
    EXPECT_GE(min_eigenvalue(hermitian_part(ra)), -1e-10);
    const ComplexMatrix h = random_hermitian(basis.dim(), rng);
    EXPECT_NEAR(std::abs(partial_trace_displaced(h, rel).trace() - h.trace()), 0.0, 1e-11);
  }
}

TEST(PartialTrace, RejectsMismatchedDimension) {
  const DisplacedBasis basis({cplx(0.1, 0.0), cplx(0.2, 0.0)}, 3);
  const GramRelation rel = build_gram_relation(basis);
  EXPECT_THROW(partial_trace_displaced(ComplexMatrix::Identity(7, 7), rel), DimensionError);
  EXPECT_THROW(embed_operator_A(ComplexMatrix::Identity(3, 3), rel), DimensionError);
}

TEST(EmbedOperator, IdentityEmbedsToIdentity) {
  const DisplacedBasis basis({cplx(0.6, 0.0), cplx(0.0, 0.6)}, 4);
  const GramRelation rel = build_gram_relation(basis);
  const ComplexMatrix e = embed_operator_A(ComplexMatrix::Identity(2, 2), rel);
  EXPECT_LT((e - ComplexMatrix::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-15);
  const ComplexMatrix full = embed_operator_A(ComplexMatrix::Ones(2, 2), rel);
  EXPECT_LT((full.block(0, 5, 5, 5) - rel.block(0, 1).conjugate()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EmbedOperator, IsAdjointOfPartialTrace) {
  std::mt19937_64 rng(17);
  const DisplacedBasis basis({cplx(0.5, -0.2), cplx(-0.4, 0.3)}, 3);
  const GramRelation rel = build_gram_relation(basis);
  for (int t = 0; t < 20; ++t) {
    const ComplexMatrix x = testing::random_matrix(basis.dim(), basis.dim(), rng);
    const ComplexMatrix y = testing::random_matrix(2, 2, rng);
    const cplx lhs = hs_inner(partial_trace_displaced(x, rel), y);
    const cplx rhs = hs_inner(x, embed_operator_A(y, rel));
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-10);
  }
}

TEST(EmbedOperator, PreservesPositivity) {
  std::mt19937_64 rng(23);
  const DisplacedBasis basis({cplx(0.7, 0.0), cplx(0.0, 0.7), cplx(-0.7, 0.0)}, 4);
  const GramRelation rel = build_gram_relation(basis);
  for (int t = 0; t < 10; ++t) {
    const ComplexMatrix s = random_density(3, rng);
    EXPECT_GE(min_eigenvalue(hermitian_part(embed_operator_A(s, rel))), -1e-12);
  }
}

}  // namespace
}  // namespace cvqkd
