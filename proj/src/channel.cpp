#include "cvqkd/channel.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cvqkd/kernels.hpp"
#include "cvqkd/quadrature.hpp"

namespace cvqkd {

namespace {

constexpr double kPi = std::numbers::pi;

// Mass of the isotropic Gaussian (1/(pi V)) exp(-|zeta - c|^2 / V) on an
// annular sector.
double gaussian_sector_mass(cplx center, double var, double r_lo, double r_hi, double th_lo,
                            double th_hi) {
  if (!(r_hi > r_lo) || !(th_hi > th_lo)) return 0.0;
  const double th_mid = 0.5 * (th_lo + th_hi);
  const double th_half = 0.5 * (th_hi - th_lo);
  const GaussRule& lo_rule = gauss_legendre(64);
  const GaussRule& hi_rule = gauss_legendre(128);
  auto theta_integral = [&](const GaussRule& rule, double r) {
    double acc = 0.0;
    for (std::size_t t = 0; t < rule.nodes.size(); ++t) {
      const double th = th_mid + th_half * rule.nodes[t];
      acc += rule.weights[t] * std::exp(-std::norm(std::polar(r, th) - center) / var);
    }
    return acc * th_half * r / (kPi * var);
  };
  const std::function<PanelEstimate<double>(double, double)> panel = [&](double a, double b) {
    const KronrodPanel p = kronrod_panel(a, b);
    double k64 = 0.0, g64 = 0.0, k128 = 0.0;
    for (std::size_t j = 0; j < 15; ++j) {
      const double f64 = theta_integral(lo_rule, p.x[j]);
      k64 += p.kronrod[j] * f64;
      g64 += p.gauss[j] * f64;
      k128 += p.kronrod[j] * theta_integral(hi_rule, p.x[j]);
    }
    return PanelEstimate<double>{k128, std::abs(k64 - g64) + std::abs(k128 - k64)};
  };
  return integrate_adaptive<double>(panel, r_lo, r_hi, 1e-13, 1e-9).value;
}

double shannon_bits(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0) h -= p(i) * std::log2(p(i));
  return h;
}

}  // namespace

double ChannelModel::eta() const {
  return std::pow(10.0, -attenuation_db_per_km * distance_km / 10.0);
}

double ChannelModel::delta() const { return eta() * xi; }

void ChannelModel::validate() const {
  if (!(distance_km >= 0.0)) throw SpecError("channel: distance_km must be non-negative");
  if (!(attenuation_db_per_km >= 0.0))
    throw SpecError("channel: attenuation_db_per_km must be non-negative");
  if (!(xi >= 0.0)) throw SpecError("channel: xi must be non-negative");
}

Moments simulate_expectations(const ChannelModel& channel, int num_signals) {
  channel.validate();
  const double d = channel.delta();
  Moments m;
  m.exp_n.assign(static_cast<std::size_t>(num_signals), d / 2.0);
  m.exp_nsq.assign(static_cast<std::size_t>(num_signals), d * (1.0 + d) / 2.0);
  return m;
}

Moments noisy_expectations(const Moments& ideal, const DetectorModel& detector) {
  detector.validate();
  const double eta = detector.eta_d;
  const double nu = detector.nu_el;
  Moments out;
  for (std::size_t i = 0; i < ideal.exp_n.size(); ++i) {
    const double n = ideal.exp_n[i];
    const double nsq = ideal.exp_nsq.at(i);
    out.exp_n.push_back(eta * n + nu);
    out.exp_nsq.push_back(eta * eta * nsq + eta * (4.0 * nu + 1.0 - eta) * n + 2.0 * nu * nu + nu);
  }
  return out;
}

Moments effective_expectations(const Moments& noisy, const DetectorModel& detector) {
  detector.validate();
  if (noisy.exp_n.size() != noisy.exp_nsq.size())
    throw DimensionError("effective_expectations: moment lists differ in length");
  const double eta = detector.eta_d;
  const double nu = detector.nu_el;
  Moments out;
  for (std::size_t i = 0; i < noisy.exp_n.size(); ++i) {
    const double shifted = noisy.exp_n[i] - nu;
    const double n = shifted / eta;
    const double nsq =
        (noisy.exp_nsq[i] - 2.0 * nu * nu - nu - (4.0 * nu + 1.0 - eta) * shifted) / (eta * eta);
    if (n < 0.0 || nsq < 0.0) {
      std::ostringstream os;
      os << "signal " << i << ": effective moments (" << n << ", " << nsq
         << ") are negative; detector characterisation is inconsistent with the data";
      throw SpecError(os.str());
    }
    out.exp_n.push_back(n);
    out.exp_nsq.push_back(nsq);
  }
  return out;
}

Eigen::MatrixXd JointDistribution::sifted() const {
  const Eigen::MatrixXd kept = joint.leftCols(kNumKeySymbols);
  const double mass = kept.sum();
  if (!(mass > 0.0)) throw NumericalError("sifted distribution has no kept mass");
  return kept / mass;
}

std::vector<cplx> channel_amplitudes(const ProtocolSpec& spec, const ChannelModel& channel) {
  std::vector<cplx> beta;
  const double s = std::sqrt(channel.eta());
  for (const cplx& a : spec.alpha) beta.push_back(s * a);
  return beta;
}

JointDistribution joint_distribution(const ProtocolSpec& spec, const ChannelModel& channel) {
  spec.validate();
  channel.validate();
  const int d = spec.num_signals();
  const double eta_d = spec.detector.eta_d;
  const double var = 1.0 + 0.5 * eta_d * channel.delta() + spec.detector.nu_el;
  const std::vector<cplx> beta = channel_amplitudes(spec, channel);
  JointDistribution jd;
  jd.conditional = Eigen::MatrixXd::Zero(d, kNumKeySymbols + 1);
  for (int i = 0; i < d; ++i) {
    const cplx c = std::sqrt(eta_d) * beta[static_cast<std::size_t>(i)];
    const double r_hi = std::abs(c) + 14.0 * std::sqrt(var);
    for (int z = 0; z < kNumKeySymbols; ++z) {
      const auto [lo, hi] = key_sector(z, spec.delta_p);
      jd.conditional(i, z) = gaussian_sector_mass(c, var, spec.delta_a, r_hi, lo, hi);
    }
    double discard = gaussian_sector_mass(c, var, 0.0, spec.delta_a, 0.0, 2.0 * kPi);
    if (spec.delta_p > 0.0)
      for (int z = 0; z < kNumKeySymbols; ++z) {
        const double edge = (2 * z + 1) * kPi / 4.0;
        discard += gaussian_sector_mass(c, var, spec.delta_a, r_hi, edge - spec.delta_p,
                                        edge + spec.delta_p);
      }
    jd.conditional(i, kDiscardColumn) = discard;
  }
  jd.joint = jd.conditional;
  for (int i = 0; i < d; ++i) jd.joint.row(i) *= spec.p[static_cast<std::size_t>(i)];
  jd.sift_prob = jd.joint.leftCols(kNumKeySymbols).sum();
  return jd;
}

double ec_cost(const Eigen::MatrixXd& q, double beta_ec) {
  const double mass = q.sum();
  if (!(mass > 0.0)) throw NumericalError("ec_cost: distribution has no mass");
  const Eigen::MatrixXd qn = q / mass;
  const Eigen::VectorXd qa = qn.rowwise().sum();
  const Eigen::VectorXd qb = qn.colwise().sum().transpose();
  const Eigen::VectorXd qab = Eigen::Map<const Eigen::VectorXd>(qn.data(), qn.size());
  const double mutual = shannon_bits(qa) + shannon_bits(qb) - shannon_bits(qab);
  return 2.0 - beta_ec * mutual;
}

std::pair<double, double> expectations_from_samples(const std::vector<cplx>& samples, cplx beta) {
  if (samples.empty()) throw SpecError("expectations_from_samples: no samples");
  double sn = 0.0, snsq = 0.0;
  for (const cplx& z : samples) {
    const double x = std::norm(z - beta);
    sn += x - 1.0;
    snsq += x * x - 3.0 * x + 1.0;
  }
  const double n = static_cast<double>(samples.size());
  return {sn / n, snsq / n};
}

std::vector<cplx> read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sample file '" + path + "'");
  std::vector<cplx> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::string body = line.substr(first);
    while (!body.empty() && (body.back() == '\r' || body.back() == ' ' || body.back() == '\t'))
      body.pop_back();
    if (out.empty() && (body == "re,im" || body == "re, im")) continue;
    const auto comma = body.find(',');
    bool ok = comma != std::string::npos;
    double re = 0.0, im = 0.0;
    if (ok) {
      try {
        std::size_t used = 0;
        const std::string a = body.substr(0, comma);
        const std::string b = body.substr(comma + 1);
        re = std::stod(a, &used);
        ok = a.find_first_not_of(" \t", used) == std::string::npos;
        im = std::stod(b, &used);
        ok = ok && b.find_first_not_of(" \t", used) == std::string::npos;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok || !std::isfinite(re) || !std::isfinite(im)) {
      std::ostringstream os;
      os << path << ":" << lineno << ": expected 're,im', got '" << body << "'";
      throw IoError(os.str());
    }
    out.emplace_back(re, im);
  }
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return out;
}

ComplexMatrix simulated_state(const ProtocolSpec& spec, const ChannelModel& channel,
                              const DisplacedBasis& basis) {
  spec.validate();
  channel.validate();
  const int d = basis.num_signals();
  if (spec.num_signals() != d) throw DimensionError("simulated_state: protocol and basis differ");
  const int s = basis.block_size();
  const double eta = channel.eta();
  const double sigma2 = channel.delta() / 2.0;
  const std::vector<cplx> beta = basis.beta();
  const std::vector<cplx> expected = channel_amplitudes(spec, channel);
  for (int i = 0; i < d; ++i)
    if (std::abs(beta[static_cast<std::size_t>(i)] - expected[static_cast<std::size_t>(i)]) > 1e-12)
      throw DimensionError("simulated_state: basis amplitudes must equal sqrt(eta) alpha_i");

  // U_i(m, k) = e^{2i Im(w_k beta_i^*)} <m|w_k> over quadrature nodes w_k of
  // the Gaussian P-function; block (i,j) is U_i W U_j^dagger.
  std::vector<double> wre, wim, weight;
  if (sigma2 == 0.0) {
    wre = {0.0};
    wim = {0.0};
    weight = {1.0};
  } else {
    const GaussRule& radial = gauss_legendre(96);
    const int n_phi = 128;
    const double t_max = 9.0;
    const double sigma = std::sqrt(sigma2);
    for (std::size_t a = 0; a < radial.nodes.size(); ++a) {
      const double t = 0.5 * t_max * (radial.nodes[a] + 1.0);
      const double wt = 0.5 * t_max * radial.weights[a] * std::exp(-t * t) * t / kPi;
      for (int b = 0; b < n_phi; ++b) {
        const double phi = 2.0 * kPi * b / n_phi;
        wre.push_back(sigma * t * std::cos(phi));
        wim.push_back(sigma * t * std::sin(phi));
        weight.push_back(wt * 2.0 * kPi / n_phi);
      }
    }
  }
  const std::size_t count = wre.size();
  std::vector<double> vre(count * static_cast<std::size_t>(s)), vim(count * static_cast<std::size_t>(s));
  kernels::coherent_vectors(wre.data(), wim.data(), count, s, vre.data(), vim.data());
  std::vector<ComplexMatrix> u(static_cast<std::size_t>(d), ComplexMatrix(s, static_cast<Eigen::Index>(count)));
  for (int i = 0; i < d; ++i) {
    const cplx bi = beta[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < count; ++k) {
      const cplx w(wre[k], wim[k]);
      const cplx phase = std::exp(cplx(0.0, 2.0 * std::imag(w * std::conj(bi))));
      for (int m = 0; m < s; ++m) {
        const std::size_t idx = static_cast<std::size_t>(m) * count + k;
        u[static_cast<std::size_t>(i)](m, static_cast<Eigen::Index>(k)) = phase * cplx(vre[idx], vim[idx]);
      }
    }
  }
  const Eigen::Map<const Eigen::VectorXd> wv(weight.data(), static_cast<Eigen::Index>(count));
  ComplexMatrix rho = ComplexMatrix::Zero(basis.dim(), basis.dim());
  const double env = std::sqrt(1.0 - eta);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) {
      const cplx c = std::sqrt(spec.p[static_cast<std::size_t>(i)] * spec.p[static_cast<std::size_t>(j)]) *
                     coherent_overlap(env * spec.alpha[static_cast<std::size_t>(i)],
                                      env * spec.alpha[static_cast<std::size_t>(j)]);
      const ComplexMatrix blk = c * (u[static_cast<std::size_t>(i)] * wv.asDiagonal() *
                                     u[static_cast<std::size_t>(j)].adjoint());
      rho.block(i * s, j * s, s, s) = blk;
      if (i != j) rho.block(j * s, i * s, s, s) = blk.adjoint();
    }
  return hermitian_part(rho);
}

}  // namespace cvqkd
