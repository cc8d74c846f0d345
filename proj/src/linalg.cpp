#include "acl/linalg.hpp"

#include <stdexcept>
#include <string>

namespace acl::linalg {

Eigen::LLT<Matrix> cholesky(const Matrix& a, std::string_view what) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument(std::string(what) + " is not square");
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success || !a.allFinite()) {
    throw std::invalid_argument(std::string(what) + " is not symmetric positive definite");
  }
  return llt;
}

bool is_spd(const Matrix& a) {
  if (a.rows() != a.cols() || !a.allFinite()) return false;
  if (!a.isApprox(a.transpose(), 1e-10) && (a - a.transpose()).norm() > 1e-12) return false;
  Eigen::LLT<Matrix> llt(a);
  return llt.info() == Eigen::Success;
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Matrix spd_inverse(const Matrix& a, std::string_view what) {
  auto llt = cholesky(a, what);
  return symmetrize(llt.solve(Matrix::Identity(a.rows(), a.cols())));
}

std::pair<double, double> eig_extremes(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

Matrix sym_sqrt(const Matrix& a, double clamp) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a));
  Vector ev = es.eigenvalues().cwiseMax(clamp).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace acl::linalg
