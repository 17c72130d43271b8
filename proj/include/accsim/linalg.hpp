#pragma once

#include <Eigen/Dense>

namespace accsim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Smallest and largest eigenvalue of a symmetric matrix (dense solve).
struct EigenRange {
  double min = 0.0;
  double max = 0.0;
};

EigenRange symmetric_eigen_range(const Matrix& sym);

/// ||S||_2 for symmetric S, i.e. the largest |eigenvalue|.
double symmetric_spectral_norm(const Matrix& sym);

/// Average of the rows, returned as a column vector.
inline Vector row_mean(const Matrix& rows) { return rows.colwise().mean().transpose(); }

/// (1/m) sum_i ||row_i - mean||^2.
double consensus_error(const Matrix& rows);

}  // namespace accsim
