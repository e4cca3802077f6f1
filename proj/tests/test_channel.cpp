#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "cvqkd/channel.hpp"
#include "cvqkd/dimred.hpp"
#include "cvqkd/quadrature.hpp"

namespace cvqkd {
namespace {

TEST(ChannelModel, TransmittanceMapping) {
  EXPECT_EQ((ChannelModel{0.0, 0.2, 0.0}.eta()), 1.0);
  EXPECT_EQ((ChannelModel{50.0, 0.2, 0.0}.eta()), 0.1);
  EXPECT_NEAR((ChannelModel{50.0, 0.2, 0.02}.delta()), 0.002, 1e-18);
  EXPECT_THROW((ChannelModel{-1.0, 0.2, 0.0}.validate()), SpecError);
}

TEST(SimulateExpectations, PaperFormulas) {
  const Moments zero = simulate_expectations(ChannelModel{10.0, 0.2, 0.0}, 4);
  EXPECT_EQ(zero.exp_n[2], 0.0);
  EXPECT_EQ(zero.exp_nsq[2], 0.0);
  const Moments m = simulate_expectations(ChannelModel{0.0, 0.2, 0.01}, 4);
  EXPECT_DOUBLE_EQ(m.exp_n[0], 0.005);
  EXPECT_DOUBLE_EQ(m.exp_nsq[3], 0.00505);
}

TEST(SimulateExpectations, ThermalMomentOracle) {
  const double nbar = 0.005;
  double s1 = 0.0, s2 = 0.0;
  for (int n = 0; n <= 100; ++n) {
    const double p = std::pow(nbar, n) / std::pow(1.0 + nbar, n + 1.0);
    s1 += n * p;
    s2 += double(n) * n * p;
  }
  const Moments m = simulate_expectations(ChannelModel{0.0, 0.2, 0.01}, 1);
  EXPECT_NEAR(m.exp_n[0], s1, 1e-10);
  EXPECT_NEAR(m.exp_nsq[0], s2, 1e-10);
}

TEST(SimulateExpectations, WeightIdentity) {
  for (double xi : {0.005, 0.01, 0.02})
    for (int cutoff : {5, 10, 20, 40}) {
      const ChannelModel ch{0.0, 0.2, xi};
      const Moments m = simulate_expectations(ch, 4);
      const WeightBound wb = weight_bound_dmcv(m.exp_n, m.exp_nsq, std::vector<double>(4, 0.25), cutoff);
      const double d = ch.delta();
      EXPECT_NEAR(wb.W, d * d / (2.0 * cutoff * (cutoff + 1.0)), 1e-12);
    }
}

TEST(EffectiveExpectations, IdealIsIdentity) {
  const Moments in{{0.3, 0.1}, {0.5, 0.2}};
  const Moments out = effective_expectations(in, DetectorModel::ideal());
  EXPECT_EQ(out.exp_n, in.exp_n);
  EXPECT_EQ(out.exp_nsq, in.exp_nsq);
}

TEST(EffectiveExpectations, RoundTrip) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto det : {DetectorModel::trusted(0.6, 0.05), DetectorModel::trusted(0.8, 0.01)}) {
    Moments ideal;
    for (int t = 0; t < 100; ++t) {
      const double x = u(rng);
      ideal.exp_n.push_back(x);
      ideal.exp_nsq.push_back(x + u(rng));
    }
    const Moments back = effective_expectations(noisy_expectations(ideal, det), det);
    for (int t = 0; t < 100; ++t) {
      EXPECT_NEAR(back.exp_n[t], ideal.exp_n[t], 1e-12);
      EXPECT_NEAR(back.exp_nsq[t], ideal.exp_nsq[t], 1e-12);
    }
  }
}

TEST(EffectiveExpectations, VacuumAndInconsistentInput) {
  const DetectorModel det = DetectorModel::trusted(0.6, 0.05);
  const Moments vac = noisy_expectations(Moments{{0.0}, {0.0}}, det);
  EXPECT_DOUBLE_EQ(vac.exp_n[0], 0.05);
  const Moments back = effective_expectations(vac, det);
  EXPECT_NEAR(back.exp_n[0], 0.0, 1e-16);
  EXPECT_THROW(effective_expectations(Moments{{0.01}, {0.1}}, det), SpecError);
}

TEST(JointDistribution, RowsSumToOneAndSymmetry) {
  for (auto spec : {ProtocolSpec::qpsk(0.7), ProtocolSpec::qpsk(0.9, 0.5, 0.1),
                    ProtocolSpec::qpsk(0.8, 0.3, 0.05, DetectorModel::trusted(0.6, 0.05))}) {
    const JointDistribution jd = joint_distribution(spec, ChannelModel{15.0, 0.2, 0.01});
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(jd.conditional.row(i).sum(), 1.0, 1e-9);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        EXPECT_NEAR(jd.conditional(i, j), jd.conditional((i + 1) % 4, (j + 1) % 4), 1e-9);
    EXPECT_NEAR(jd.sift_prob, jd.joint.leftCols(4).sum(), 1e-15);
    EXPECT_NEAR(jd.sifted().sum(), 1.0, 1e-14);
  }
}

TEST(JointDistribution, NoDiscardWithoutPostselection) {
  const JointDistribution jd = joint_distribution(ProtocolSpec::qpsk(0.7), ChannelModel{5.0, 0.2, 0.02});
  for (int i = 0; i < 4; ++i) EXPECT_EQ(jd.conditional(i, kDiscardColumn), 0.0);
  EXPECT_NEAR(jd.sift_prob, 1.0, 1e-9);
}

TEST(JointDistribution, SiftProbabilityDecreasesWithRadius) {
  double prev = 2.0;
  for (double da : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
    const double s = joint_distribution(ProtocolSpec::qpsk(0.8, da), ChannelModel{20.0, 0.2, 0.02}).sift_prob;
    EXPECT_LT(s, prev);
    prev = s;
  }
}

TEST(EcCost, TrivialDistributions) {
  EXPECT_DOUBLE_EQ(ec_cost(Eigen::MatrixXd::Constant(4, 4, 1.0 / 16.0), 0.95), 2.0);
  EXPECT_DOUBLE_EQ(ec_cost(Eigen::MatrixXd::Identity(4, 4) / 4.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(ec_cost(Eigen::MatrixXd::Identity(4, 4), 1.0), 0.0);  // renormalised
}

TEST(EcCost, DecreasingInEfficiency) {
  const JointDistribution jd = joint_distribution(ProtocolSpec::qpsk(0.8), ChannelModel{10.0, 0.2, 0.01});
  double prev = 3.0;
  for (double b : {0.5, 0.8, 0.95, 1.0}) {
    const double c = ec_cost(jd.sifted(), b);
    EXPECT_LT(c, prev);
    EXPECT_GE(c, 0.0);
    prev = c;
  }
}

TEST(Samples, ExactlyAtDisplacement) {
  const cplx beta(0.3, -0.2);
  const auto [n, nsq] = expectations_from_samples(std::vector<cplx>(10, beta), beta);
  EXPECT_EQ(n, -1.0);
  EXPECT_EQ(nsq, 1.0);
  EXPECT_THROW(expectations_from_samples({}, beta), SpecError);
}

TEST(Samples, MonteCarloCoherentState) {
  const cplx beta(0.5, 0.4);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  std::vector<cplx> s;
  const int count = 1000000;
  for (int k = 0; k < count; ++k) s.push_back(beta + cplx(g(rng), g(rng)));
  const auto [n, nsq] = expectations_from_samples(s, beta);
  EXPECT_LT(std::abs(n), 3.0 / std::sqrt(double(count)));
  EXPECT_LT(std::abs(nsq), 10.0 / std::sqrt(double(count)));
}

TEST(Samples, ConsistentWithSimulationChannel) {
  const ChannelModel ch{10.0, 0.2, 0.05};
  const double var = 1.0 + 0.5 * ch.delta();
  const cplx beta = std::sqrt(ch.eta()) * cplx(0.7, 0.0);
  // Quadrature of the estimators against the heterodyne density; |zeta - beta|^2 is exponential with mean var.
  const double qn = integrate_gk15([&](double x) { return (x - 1.0) * std::exp(-x / var) / var; }, 0.0, 80.0).value;
  const double qq =
      integrate_gk15([&](double x) { return (x * x - 3.0 * x + 1.0) * std::exp(-x / var) / var; }, 0.0, 80.0).value;
  EXPECT_NEAR(qn, ch.delta() / 2.0, 1e-12);
  EXPECT_NEAR(qq, ch.delta() * (1.0 + ch.delta()) / 2.0, 1e-12);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
  std::vector<cplx> s;
  const int count = 400000;
  double m2n = 0.0, m2q = 0.0;
  for (int k = 0; k < count; ++k) {
    s.push_back(beta + cplx(g(rng), g(rng)));
    const double x = std::norm(s.back() - beta);
    m2n += (x - 1.0) * (x - 1.0);
    m2q += std::pow(x * x - 3.0 * x + 1.0, 2);
  }
  const auto [n, nsq] = expectations_from_samples(s, beta);
  const double sd_n = std::sqrt((m2n / count - n * n) / count);
  const double sd_q = std::sqrt((m2q / count - nsq * nsq) / count);
  EXPECT_LT(std::abs(n - qn), 5.0 * sd_n);
  EXPECT_LT(std::abs(nsq - qq), 5.0 * sd_q);
}

TEST(Samples, CsvReader) {
  const std::string path = ::testing::TempDir() + "cvqkd_samples.csv";
  {
    std::ofstream out(path);
    out << "re,im\n# comment\n\n0.5,-0.25\n 1e-3 , 2\r\n";
  }
  const auto v = read_samples_csv(path);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0], cplx(0.5, -0.25));
  EXPECT_EQ(v[1], cplx(1e-3, 2.0));
  {
    std::ofstream out(path);
    out << "0.1,0.2\n0.3;0.4\n";
  }
  try {
    read_samples_csv(path);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  std::remove(path.c_str());
  EXPECT_THROW(read_samples_csv(path), IoError);
}

TEST(SimulatedState, DiagonalBlocksAreThermal) {
  const ProtocolSpec spec = ProtocolSpec::qpsk(0.6);
  const ChannelModel ch{10.0, 0.2, 0.05};
  const DisplacedBasis basis(channel_amplitudes(spec, ch), 8);
  const ComplexMatrix rho = simulated_state(spec, ch, basis);
  const double nbar = ch.delta() / 2.0;
  for (int i = 0; i < 4; ++i)
    for (int m = 0; m <= 8; ++m)
      for (int n = 0; n <= 8; ++n) {
        const double want = m == n ? 0.25 * std::pow(nbar, n) / std::pow(1.0 + nbar, n + 1.0) : 0.0;
        EXPECT_NEAR(std::abs(rho(9 * i + m, 9 * i + n) - want), 0.0, 1e-13);
      }
  EXPECT_LT(hermitian_defect(rho), 1e-15);
  EXPECT_GE(min_eigenvalue(rho), -1e-13);
}

TEST(SimulatedState, ReducedStateMatchesSource) {
  const ProtocolSpec spec = ProtocolSpec::qpsk(0.75);
  for (double xi : {0.0, 0.02}) {
    const ChannelModel ch{15.0, 0.2, xi};
    const DisplacedBasis basis(channel_amplitudes(spec, ch), 20);
    const GramRelation rel = build_gram_relation(basis);
    const ComplexMatrix rho = simulated_state(spec, ch, basis);
    const ComplexMatrix ra = partial_trace_displaced(rho, rel);
    EXPECT_LT(half_trace_norm(ra - reduced_state_target(spec)), 1e-9);
  }
  EXPECT_THROW(simulated_state(spec, ChannelModel{15.0, 0.2, 0.0},
                               DisplacedBasis(spec.alpha, 3)),
               DimensionError);
}

}  // namespace
}  // namespace cvqkd
