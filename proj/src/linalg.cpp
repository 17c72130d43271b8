#include "accsim/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace accsim {

EigenRange symmetric_eigen_range(const Matrix& sym) {
  if (sym.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

double symmetric_spectral_norm(const Matrix& sym) {
  const auto r = symmetric_eigen_range(sym);
  return std::max(std::abs(r.min), std::abs(r.max));
}

double consensus_error(const Matrix& rows) {
  if (rows.rows() == 0) return 0.0;
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  return (rows.rowwise() - mean).squaredNorm() / static_cast<double>(rows.rows());
}

}  // namespace accsim
