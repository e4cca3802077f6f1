#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "cvqkd/kernels.hpp"
#include "test_support.hpp"

namespace cvqkd {
namespace {

struct Nodes {
  std::vector<double> re, im, w;
};

Nodes random_nodes(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Nodes n;
  for (std::size_t k = 0; k < count; ++k) {
    n.re.push_back(g(rng));
    n.im.push_back(g(rng));
    n.w.push_back(u(rng));
  }
  return n;
}

TEST(Kernels, ScalarCoherentVectorsMatchClosedForm) {
  const Nodes n = random_nodes(37, 1);
  const int levels = 12;
  std::vector<double> vr(37 * levels), vi(37 * levels);
  kernels::coherent_vectors_scalar(n.re.data(), n.im.data(), 37, levels, vr.data(), vi.data());
  for (std::size_t k = 0; k < 37; ++k) {
    const ComplexVector c = testing::coherent_amplitudes(levels, cplx(n.re[k], n.im[k]));
    for (int m = 0; m < levels; ++m) {
      const std::size_t idx = static_cast<std::size_t>(m) * 37 + k;
      EXPECT_NEAR(std::abs(cplx(vr[idx], vi[idx]) - c(m)), 0.0, 1e-14);
    }
  }
}

class KernelEquivalence : public ::testing::TestWithParam<std::size_t> {};

TEST_P(KernelEquivalence, Avx2MatchesScalar) {
  if (!kernels::avx2_available()) GTEST_SKIP() << "CPU lacks AVX2/FMA";
  const std::size_t count = GetParam();
  const Nodes n = random_nodes(count, 100 + count);
  const int levels = 9;
  std::vector<double> sr(count * levels), si(count * levels), ar(count * levels), ai(count * levels);
  kernels::coherent_vectors_scalar(n.re.data(), n.im.data(), count, levels, sr.data(), si.data());
  kernels::coherent_vectors_avx2(n.re.data(), n.im.data(), count, levels, ar.data(), ai.data());
  // The AVX2 translation unit may contract multiply-adds, so agreement is to
  // rounding rather than bitwise.
  for (std::size_t i = 0; i < sr.size(); ++i) {
    EXPECT_NEAR(sr[i], ar[i], 1e-14 * std::max(1.0, std::abs(sr[i])));
    EXPECT_NEAR(si[i], ai[i], 1e-14 * std::max(1.0, std::abs(si[i])));
  }
  ComplexMatrix hs = ComplexMatrix::Zero(levels, levels);
  ComplexMatrix ha = ComplexMatrix::Zero(levels, levels);
  kernels::accumulate_outer_scalar(sr.data(), si.data(), n.w.data(), count, levels, hs.data());
  kernels::accumulate_outer_avx2(sr.data(), si.data(), n.w.data(), count, levels, ha.data());
  const double scale = std::max(1.0, hs.cwiseAbs().maxCoeff());
  EXPECT_LT((hs - ha).cwiseAbs().maxCoeff() / scale, 1e-13);
}

INSTANTIATE_TEST_SUITE_P(Counts, KernelEquivalence, ::testing::Values(1, 3, 4, 5, 16, 63, 960));

TEST(Kernels, AccumulateOuterMatchesDenseProduct) {
  const std::size_t count = 50;
  const int levels = 7;
  const Nodes n = random_nodes(count, 9);
  std::vector<double> vr(count * levels), vi(count * levels);
  kernels::coherent_vectors(n.re.data(), n.im.data(), count, levels, vr.data(), vi.data());
  ComplexMatrix v(levels, static_cast<Eigen::Index>(count));
  for (int m = 0; m < levels; ++m)
    for (std::size_t k = 0; k < count; ++k)
      v(m, static_cast<Eigen::Index>(k)) = cplx(vr[m * count + k], vi[m * count + k]);
  RealVector w(static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) w(static_cast<Eigen::Index>(k)) = n.w[k];
  const ComplexMatrix want = v * w.asDiagonal() * v.adjoint();
  ComplexMatrix h = ComplexMatrix::Zero(levels, levels);
  kernels::accumulate_outer(vr.data(), vi.data(), n.w.data(), count, levels, h.data());
  for (int c = 0; c < levels; ++c)
    for (int r = c; r < levels; ++r) EXPECT_NEAR(std::abs(h(r, c) - want(r, c)), 0.0, 1e-13);
  // Upper triangle untouched.
  for (int c = 1; c < levels; ++c)
    for (int r = 0; r < c; ++r) EXPECT_EQ(h(r, c), cplx(0.0, 0.0));
}

TEST(Kernels, DispatchReportsIsa) {
  const auto isa = kernels::active_isa();
  EXPECT_EQ(isa == kernels::Isa::avx2, kernels::avx2_available());
  EXPECT_STRNE(kernels::isa_name(isa), "");
}

}  // namespace
}  // namespace cvqkd
