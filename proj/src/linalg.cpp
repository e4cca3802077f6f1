#include "cvqkd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cvqkd {

double hermitian_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("hermitian_defect: matrix is not square");
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

ComplexMatrix enforce_hermitian(const ComplexMatrix& m, double tol) {
  const double defect = hermitian_defect(m);
  const double scale = m.size() == 0 ? 1.0 : std::max(1.0, m.cwiseAbs().maxCoeff());
  if (defect > tol * scale) {
    std::ostringstream os;
    os << "matrix expected Hermitian has asymmetry " << defect << " (scale " << scale << ")";
    throw NumericalError(os.str());
  }
  return hermitian_part(m);
}

HermitianEigen eigh(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
  return es.eigenvalues()(0);
}

double max_eigenvalue(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

ComplexMatrix apply_spectral(const ComplexMatrix& h, const std::function<double(double)>& f) {
  const auto es = eigh(h);
  RealVector fv(es.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(es.values(i));
  return es.vectors * fv.asDiagonal() * es.vectors.adjoint();
}

ComplexMatrix sqrtm_psd(const ComplexMatrix& h) {
  return apply_spectral(h, [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; });
}

ComplexMatrix logm_floored(const ComplexMatrix& h, double floor) {
  return apply_spectral(h, [floor](double x) { return std::log(std::max(x, floor)); });
}

double trace_xlogx_bits(const RealVector& eigenvalues, double floor) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double x = eigenvalues(i);
    acc += x * std::log2(std::max(x, floor));
  }
  return acc;
}

ComplexMatrix block_diagonal(const std::vector<ComplexMatrix>& blocks) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) {
    if (b.rows() != b.cols()) throw DimensionError("block_diagonal: non-square block");
    total += b.rows();
  }
  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

}  // namespace cvqkd
