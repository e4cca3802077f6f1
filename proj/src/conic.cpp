#include "cvqkd/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace cvqkd {

void ConicProblem::validate() const {
  if (c_blocks.size() != block_sizes.size()) throw DimensionError("ConicProblem: one cost block per cone block");
  for (std::size_t b = 0; b < block_sizes.size(); ++b)
    if (c_blocks[b].rows() != block_sizes[b] || c_blocks[b].cols() != block_sizes[b])
      throw DimensionError("ConicProblem: cost block " + std::to_string(b) + " has the wrong size");
  if (c_lp.size() != lp_size) throw DimensionError("ConicProblem: c_lp size");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (const auto& t : rows[k].terms) {
      if (t.block < 0 || t.block >= static_cast<int>(block_sizes.size()))
        throw DimensionError("ConicProblem: row " + std::to_string(k) + " references a missing block");
      const int n = block_sizes[static_cast<std::size_t>(t.block)];
      for (const auto& p : t.patches)
        if (p.row < 0 || p.col < 0 || p.row + p.value.rows() > n || p.col + p.value.cols() > n)
          throw DimensionError("ConicProblem: row " + std::to_string(k) + " has a patch out of range");
    }
    for (const auto& [j, a] : rows[k].lp)
      if (j < 0 || j >= lp_size) throw DimensionError("ConicProblem: lp index out of range");
  }
}

std::vector<Patch> tile_patches(const ComplexMatrix& m, int tile) {
  if (m.rows() != m.cols() || tile <= 0 || m.rows() % tile != 0)
    throw DimensionError("tile_patches: matrix must be square and divisible by the tile");
  std::vector<Patch> out;
  const int nt = static_cast<int>(m.rows()) / tile;
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nt; ++j) {
      const ComplexMatrix v = m.block(i * tile, j * tile, tile, tile);
      if (v.cwiseAbs().maxCoeff() > 0.0) out.push_back({i * tile, j * tile, v});
    }
  return out;
}

std::string status_name(ConicStatus s) {
  switch (s) {
    case ConicStatus::optimal: return "optimal";
    case ConicStatus::max_iterations: return "max_iterations";
    case ConicStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

// Re Tr(A M) restricted to one patch of A.
double patch_inner(const Patch& p, const ComplexMatrix& m) {
  return p.value.cwiseProduct(m.block(p.col, p.row, p.value.cols(), p.value.rows()).transpose()).sum().real();
}

double term_inner(const BlockTerm& t, const ComplexMatrix& m) {
  double s = 0.0;
  for (const auto& p : t.patches) s += patch_inner(p, m);
  return s;
}

double term_norm_sq(const BlockTerm& t) {
  double s = 0.0;
  for (const auto& p : t.patches) s += p.value.squaredNorm();
  return s;
}

double frob_sq(const std::vector<ComplexMatrix>& blocks, const RealVector& lp) {
  double s = lp.squaredNorm();
  for (const auto& b : blocks) s += b.squaredNorm();
  return s;
}

double inner(const std::vector<ComplexMatrix>& a, const RealVector& alp, const std::vector<ComplexMatrix>& b,
             const RealVector& blp) {
  double s = alp.dot(blp);
  for (std::size_t i = 0; i < a.size(); ++i) s += real_inner(a[i], b[i]);
  return s;
}

// Largest alpha with X + alpha dX >= 0 (infinity when unbounded), given X = L L^dagger.
double max_step_psd(const Eigen::LLT<ComplexMatrix>& llt, const ComplexMatrix& dx) {
  const ComplexMatrix linv_dx = llt.matrixL().solve(dx);
  const ComplexMatrix w = llt.matrixL().solve(linv_dx.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(w), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double max_step_lp(const RealVector& x, const RealVector& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (dx(j) < 0.0) a = std::min(a, -x(j) / dx(j));
  return a;
}

struct Direction {
  std::vector<ComplexMatrix> dX, dZ;
  RealVector dx, dz, dy;
};

class Engine {
public:
  Engine(const ConicProblem& pr, const ConicOptions& opt) : p_(pr), opt_(opt) {
    m_ = p_.num_rows();
    nb_ = p_.block_sizes.size();
    by_block_.resize(nb_);
    for (int k = 0; k < m_; ++k)
      for (std::size_t t = 0; t < p_.rows[static_cast<std::size_t>(k)].terms.size(); ++t)
        by_block_[static_cast<std::size_t>(p_.rows[static_cast<std::size_t>(k)].terms[t].block)].push_back({k, t});
    a_lp_ = Eigen::MatrixXd::Zero(m_, p_.lp_size);
    for (int k = 0; k < m_; ++k)
      for (const auto& [j, a] : p_.rows[static_cast<std::size_t>(k)].lp) a_lp_(k, j) += a;
    b_ = RealVector(m_);
    for (int k = 0; k < m_; ++k) b_(k) = p_.rows[static_cast<std::size_t>(k)].rhs;
    cone_dim_ = p_.lp_size;
    for (int n : p_.block_sizes) cone_dim_ += n;
  }

  RealVector apply_a(const std::vector<ComplexMatrix>& x, const RealVector& xl) const {
    RealVector out = a_lp_ * xl;
    for (int k = 0; k < m_; ++k)
      for (const auto& t : p_.rows[static_cast<std::size_t>(k)].terms)
        out(k) += term_inner(t, x[static_cast<std::size_t>(t.block)]);
    return out;
  }

  void apply_at(const RealVector& y, std::vector<ComplexMatrix>& out, RealVector& out_lp) const {
    out.resize(nb_);
    for (std::size_t b = 0; b < nb_; ++b) out[b] = ComplexMatrix::Zero(p_.block_sizes[b], p_.block_sizes[b]);
    out_lp = a_lp_.transpose() * y;
    for (int k = 0; k < m_; ++k)
      for (const auto& t : p_.rows[static_cast<std::size_t>(k)].terms)
        for (const auto& pt : t.patches)
          out[static_cast<std::size_t>(t.block)].block(pt.row, pt.col, pt.value.rows(), pt.value.cols()) +=
              y(k) * pt.value;
  }

  ConicSolution run() {
    init_point();
    ConicSolution best;
    double best_score = std::numeric_limits<double>::infinity();
    const double bnorm = b_.norm();
    const double cnorm = std::sqrt(frob_sq(p_.c_blocks, p_.c_lp));
    int it = 0;
    ConicStatus status = ConicStatus::max_iterations;
    for (;; ++it) {
      std::vector<ComplexMatrix> aty;
      RealVector aty_lp;
      apply_at(y_, aty, aty_lp);
      std::vector<ComplexMatrix> rd(nb_);
      for (std::size_t b = 0; b < nb_; ++b) rd[b] = p_.c_blocks[b] - Z_[b] - aty[b];
      const RealVector rd_lp = p_.c_lp - z_ - aty_lp;
      const RealVector rp = b_ - apply_a(X_, x_);
      const double pinf = rp.norm() / (1.0 + bnorm);
      const double dinf = std::sqrt(frob_sq(rd, rd_lp)) / (1.0 + cnorm);
      const double pobj = inner(p_.c_blocks, p_.c_lp, X_, x_);
      const double dobj = b_.dot(y_);
      const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      const double score = std::max({pinf, dinf, gap});
      if (opt_.verbose)
        std::fprintf(stderr, "ipm %3d pobj %+.12e dobj %+.12e pinf %.2e dinf %.2e gap %.2e\n", it, pobj, dobj, pinf,
                     dinf, gap);
      if (score < best_score) {
        best_score = score;
        best = snapshot(pobj, dobj, pinf, dinf, gap, it);
      }
      if (pinf < opt_.tol && dinf < opt_.tol && gap < opt_.tol) {
        status = ConicStatus::optimal;
        break;
      }
      if (it >= opt_.max_iterations) break;

      const double mu = inner(X_, x_, Z_, z_) / cone_dim_;
      if (!std::isfinite(mu) || !factor(mu, rd)) {
        status = ConicStatus::numerical_failure;
        break;
      }
      // Predictor.
      std::vector<ComplexMatrix> k(nb_);
      for (std::size_t b = 0; b < nb_; ++b) k[b] = -X_[b];
      RealVector k_lp = -x_;
      Direction pred = direction(k, k_lp, rp, rd, rd_lp);
      const double ap = std::min(1.0, primal_step(pred));
      const double ad = std::min(1.0, dual_step(pred));
      double mu_aff = 0.0;
      for (std::size_t b = 0; b < nb_; ++b)
        mu_aff += real_inner(X_[b] + ap * pred.dX[b], Z_[b] + ad * pred.dZ[b]);
      mu_aff += (x_ + ap * pred.dx).dot(z_ + ad * pred.dz);
      mu_aff /= cone_dim_;
      const double expo = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
      const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, expo), 0.0, 1.0);
      // Corrector.
      for (std::size_t b = 0; b < nb_; ++b)
        k[b] = sigma * mu * zinv_[b] - X_[b] - pred.dX[b] * pred.dZ[b] * zinv_[b];
      k_lp = (sigma * mu - pred.dx.array() * pred.dz.array()).matrix().cwiseQuotient(z_) - x_;
      Direction cor = direction(k, k_lp, rp, rd, rd_lp);
      const double gamma = 0.9 + 0.09 * std::min(ap, ad);
      const double sp = std::min(1.0, gamma * primal_step(cor));
      const double sd = std::min(1.0, gamma * dual_step(cor));
      if (opt_.verbose) std::fprintf(stderr, "    sigma %.2e steps %.3e %.3e\n", sigma, sp, sd);
      if (sp < 1e-10 && sd < 1e-10) {
        status = ConicStatus::numerical_failure;
        break;
      }
      for (std::size_t b = 0; b < nb_; ++b) {
        X_[b] = hermitian_part(X_[b] + sp * cor.dX[b]);
        Z_[b] = hermitian_part(Z_[b] + sd * cor.dZ[b]);
      }
      x_ += sp * cor.dx;
      z_ += sd * cor.dz;
      y_ += sd * cor.dy;
    }
    if (status == ConicStatus::optimal) {
      ConicSolution s = snapshot(0, 0, 0, 0, 0, it);
      s.status = status;
      return s;
    }
    best.status = status;
    return best;
  }

private:
  void init_point() {
    X_.resize(nb_);
    Z_.resize(nb_);
    for (std::size_t b = 0; b < nb_; ++b) {
      const double n = p_.block_sizes[b];
      double xi = std::max(10.0, std::sqrt(n));
      double eta = std::max({10.0, std::sqrt(n), p_.c_blocks[b].norm()});
      for (const auto& [k, t] : by_block_[b]) {
        const double an = std::sqrt(term_norm_sq(p_.rows[static_cast<std::size_t>(k)].terms[t]));
        xi = std::max(xi, n * (1.0 + std::abs(b_(k))) / (1.0 + an));
        eta = std::max(eta, an);
      }
      X_[b] = xi * ComplexMatrix::Identity(p_.block_sizes[b], p_.block_sizes[b]);
      Z_[b] = eta * ComplexMatrix::Identity(p_.block_sizes[b], p_.block_sizes[b]);
    }
    double xi = std::max(10.0, std::sqrt(double(p_.lp_size)));
    double eta = std::max({10.0, std::sqrt(double(p_.lp_size)), p_.c_lp.norm()});
    for (int k = 0; k < m_; ++k) {
      const double an = a_lp_.row(k).norm();
      if (an == 0.0) continue;
      xi = std::max(xi, (1.0 + std::abs(b_(k))) / (1.0 + an));
      eta = std::max(eta, an);
    }
    x_ = RealVector::Constant(p_.lp_size, xi);
    z_ = RealVector::Constant(p_.lp_size, eta);
    y_ = RealVector::Zero(m_);
  }

  // Z^{-1} per block and the Cholesky factor of the HKM Schur complement
  //   M_kl = Re Tr(A_k X A_l Z^{-1}) + a_k . (x / z) a_l.
  bool factor(double mu, const std::vector<ComplexMatrix>& rd) {
    zinv_.resize(nb_);
    xrz_.resize(nb_);
    lx_.resize(nb_);
    lz_.resize(nb_);
    for (std::size_t b = 0; b < nb_; ++b) {
      lx_[b].compute(X_[b]);
      lz_[b].compute(Z_[b]);
      if (lx_[b].info() != Eigen::Success || lz_[b].info() != Eigen::Success) return false;
      zinv_[b] = lz_[b].solve(ComplexMatrix::Identity(Z_[b].rows(), Z_[b].cols()));
      xrz_[b] = X_[b] * rd[b] * zinv_[b];
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(m_, m_);
    for (std::size_t b = 0; b < nb_; ++b) {
      const auto& rows = by_block_[b];
      const ComplexMatrix& x = X_[b];
      const ComplexMatrix& zi = zinv_[b];
      const Eigen::Index n = x.rows();
      ComplexMatrix t(n, n);
      for (std::size_t li = 0; li < rows.size(); ++li) {
        const BlockTerm& tl = p_.rows[static_cast<std::size_t>(rows[li].first)].terms[rows[li].second];
        t.setZero();
        for (const auto& pt : tl.patches)
          t.noalias() += (x.middleCols(pt.row, pt.value.rows()) * pt.value) * zi.middleRows(pt.col, pt.value.cols());
        for (std::size_t ki = 0; ki <= li; ++ki) {
          const BlockTerm& tk = p_.rows[static_cast<std::size_t>(rows[ki].first)].terms[rows[ki].second];
          const double v = term_inner(tk, t);
          m(rows[ki].first, rows[li].first) += v;
          if (ki != li) m(rows[li].first, rows[ki].first) += v;
        }
      }
    }
    const RealVector d = x_.cwiseQuotient(z_);
    m.noalias() += a_lp_ * d.asDiagonal() * a_lp_.transpose();
    m = 0.5 * (m + m.transpose()).eval();
    schur_.compute(m);
    if (schur_.info() == Eigen::Success) {
      use_ldlt_ = false;
      return true;
    }
    const double shift = std::max(1e-14 * m.diagonal().cwiseAbs().maxCoeff(), 1e-300) + 1e-16 * mu;
    ldlt_.compute(m + shift * Eigen::MatrixXd::Identity(m_, m_));
    use_ldlt_ = true;
    return ldlt_.info() == Eigen::Success;
  }

  Direction direction(const std::vector<ComplexMatrix>& k, const RealVector& k_lp, const RealVector& rp,
                      const std::vector<ComplexMatrix>& rd, const RealVector& rd_lp) const {
    const RealVector xrz_lp = x_.cwiseProduct(rd_lp).cwiseQuotient(z_);
    const RealVector rhs = rp - apply_a(k, k_lp) + apply_a(xrz_, xrz_lp);
    Direction d;
    d.dy = use_ldlt_ ? RealVector(ldlt_.solve(rhs)) : RealVector(schur_.solve(rhs));
    RealVector aty_lp;
    apply_at(d.dy, d.dZ, aty_lp);
    d.dX.resize(nb_);
    for (std::size_t b = 0; b < nb_; ++b) {
      d.dZ[b] = rd[b] - d.dZ[b];
      d.dX[b] = hermitian_part(k[b] - X_[b] * d.dZ[b] * zinv_[b]);
    }
    d.dz = rd_lp - aty_lp;
    d.dx = k_lp - x_.cwiseProduct(d.dz).cwiseQuotient(z_);
    // Iterative refinement: an ill-conditioned Schur complement leaves
    // A(dX) != rp, which stalls primal feasibility near the optimum.
    double err = (rp - apply_a(d.dX, d.dx)).norm();
    for (int pass = 0; pass < 3 && err > 1e-15 * (1.0 + rp.norm()); ++pass) {
      const RealVector e = rp - apply_a(d.dX, d.dx);
      const RealVector ddy = use_ldlt_ ? RealVector(ldlt_.solve(e)) : RealVector(schur_.solve(e));
      std::vector<ComplexMatrix> ddz;
      RealVector ddz_lp;
      apply_at(ddy, ddz, ddz_lp);
      Direction t = d;
      t.dy += ddy;
      for (std::size_t b = 0; b < nb_; ++b) {
        t.dZ[b] -= ddz[b];
        t.dX[b] += hermitian_part(X_[b] * ddz[b] * zinv_[b]);
      }
      t.dz -= ddz_lp;
      t.dx += x_.cwiseProduct(ddz_lp).cwiseQuotient(z_);
      const double terr = (rp - apply_a(t.dX, t.dx)).norm();
      if (!(terr < err)) break;
      d = std::move(t);
      err = terr;
    }
    return d;
  }

  double primal_step(const Direction& d) const {
    double a = max_step_lp(x_, d.dx);
    for (std::size_t b = 0; b < nb_; ++b) a = std::min(a, max_step_psd(lx_[b], d.dX[b]));
    return a;
  }
  double dual_step(const Direction& d) const {
    double a = max_step_lp(z_, d.dz);
    for (std::size_t b = 0; b < nb_; ++b) a = std::min(a, max_step_psd(lz_[b], d.dZ[b]));
    return a;
  }

  ConicSolution snapshot(double pobj, double dobj, double pinf, double dinf, double gap, int it) const {
    ConicSolution s;
    s.x_blocks = X_;
    s.x_lp = x_;
    s.y = y_;
    s.z_blocks = Z_;
    s.z_lp = z_;
    s.primal_objective = pobj;
    s.dual_objective = dobj;
    s.primal_residual = pinf;
    s.dual_residual = dinf;
    s.relative_gap = gap;
    s.iterations = it;
    return s;
  }

  const ConicProblem& p_;
  ConicOptions opt_;
  int m_ = 0;
  std::size_t nb_ = 0;
  double cone_dim_ = 0.0;
  std::vector<std::vector<std::pair<int, std::size_t>>> by_block_;
  Eigen::MatrixXd a_lp_;
  RealVector b_;
  std::vector<ComplexMatrix> X_, Z_, zinv_, xrz_;
  std::vector<Eigen::LLT<ComplexMatrix>> lx_, lz_;
  RealVector x_, z_, y_;
  Eigen::LLT<Eigen::MatrixXd> schur_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  bool use_ldlt_ = false;
};

// Row equilibration plus scaling of b and C so the engine sees unit-sized data.
struct Scaling {
  RealVector row;
  double b = 1.0;
  double c = 1.0;
};

ConicProblem scaled_copy(const ConicProblem& p, Scaling& s) {
  ConicProblem q = p;
  const int m = p.num_rows();
  s.row = RealVector::Ones(m);
  for (int k = 0; k < m; ++k) {
    auto& r = q.rows[static_cast<std::size_t>(k)];
    double nsq = 0.0;
    for (const auto& t : r.terms) nsq += term_norm_sq(t);
    for (const auto& [j, a] : r.lp) nsq += a * a;
    const double norm = std::sqrt(nsq);
    if (norm == 0.0) continue;
    s.row(k) = norm;
    for (auto& t : r.terms)
      for (auto& pt : t.patches) pt.value /= norm;
    for (auto& e : r.lp) e.second /= norm;
    r.rhs /= norm;
  }
  double bn = 0.0;
  for (const auto& r : q.rows) bn = std::max(bn, std::abs(r.rhs));
  s.b = std::max(1.0, bn);
  for (auto& r : q.rows) r.rhs /= s.b;
  s.c = std::max(1.0, std::sqrt(frob_sq(q.c_blocks, q.c_lp)));
  for (auto& c : q.c_blocks) c /= s.c;
  q.c_lp /= s.c;
  return q;
}

}  // namespace

RealVector apply_constraints(const ConicProblem& problem, const std::vector<ComplexMatrix>& x_blocks,
                             const RealVector& x_lp) {
  RealVector out = RealVector::Zero(problem.num_rows());
  for (int k = 0; k < problem.num_rows(); ++k) {
    const auto& r = problem.rows[static_cast<std::size_t>(k)];
    for (const auto& t : r.terms) out(k) += term_inner(t, x_blocks[static_cast<std::size_t>(t.block)]);
    for (const auto& [j, a] : r.lp) out(k) += a * x_lp(j);
  }
  return out;
}

std::pair<std::vector<ComplexMatrix>, RealVector> apply_adjoint(const ConicProblem& problem, const RealVector& y) {
  std::vector<ComplexMatrix> out;
  for (int n : problem.block_sizes) out.push_back(ComplexMatrix::Zero(n, n));
  RealVector lp = RealVector::Zero(problem.lp_size);
  for (int k = 0; k < problem.num_rows(); ++k) {
    const auto& r = problem.rows[static_cast<std::size_t>(k)];
    for (const auto& t : r.terms)
      for (const auto& pt : t.patches)
        out[static_cast<std::size_t>(t.block)].block(pt.row, pt.col, pt.value.rows(), pt.value.cols()) +=
            y(k) * pt.value;
    for (const auto& [j, a] : r.lp) lp(j) += a * y(k);
  }
  return {out, lp};
}

ConicSolution InteriorPointAdapter::submit(const ConicProblem& problem, const ConicOptions& options) const {
  problem.validate();
  if (!(options.tol > 0.0)) throw std::invalid_argument("InteriorPointAdapter: tol must be positive");
  Scaling sc;
  const ConicProblem q = scaled_copy(problem, sc);
  Engine engine(q, options);
  ConicSolution s = engine.run();
  for (auto& x : s.x_blocks) x *= sc.b;
  s.x_lp *= sc.b;
  for (auto& z : s.z_blocks) z *= sc.c;
  s.z_lp *= sc.c;
  s.y = sc.c * s.y.cwiseQuotient(sc.row);
  s.primal_objective = inner(problem.c_blocks, problem.c_lp, s.x_blocks, s.x_lp);
  RealVector b(problem.num_rows());
  for (int k = 0; k < problem.num_rows(); ++k) b(k) = problem.rows[static_cast<std::size_t>(k)].rhs;
  s.dual_objective = b.dot(s.y);
  // Residuals reported on the unscaled data.
  s.primal_residual = (apply_constraints(problem, s.x_blocks, s.x_lp) - b).norm() / (1.0 + b.norm());
  auto [aty, aty_lp] = apply_adjoint(problem, s.y);
  double dsq = (problem.c_lp - s.z_lp - aty_lp).squaredNorm();
  for (std::size_t i = 0; i < aty.size(); ++i) dsq += (problem.c_blocks[i] - s.z_blocks[i] - aty[i]).squaredNorm();
  s.dual_residual = std::sqrt(dsq) / (1.0 + std::sqrt(frob_sq(problem.c_blocks, problem.c_lp)));
  s.relative_gap = std::abs(s.primal_objective - s.dual_objective) /
                   (1.0 + std::abs(s.primal_objective) + std::abs(s.dual_objective));
  return s;
}

std::shared_ptr<const ConicSolverAdapter> default_conic_adapter() {
  static const auto adapter = std::make_shared<const InteriorPointAdapter>();
  return adapter;
}

}  // namespace cvqkd
