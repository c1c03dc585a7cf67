#include "tasksample/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace tasksample {

PseudoInverse pseudo_inverse(const Matrix& a, double rcond) {
  PseudoInverse out;
  out.matrix = Matrix::Zero(a.cols(), a.rows());
  if (a.size() == 0) return out;

  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff =
      rcond * static_cast<double>(std::max(a.rows(), a.cols())) * s(0);
  Vector inv = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) {
      inv(i) = 1.0 / s(i);
      ++out.rank;
    }
  }
  out.matrix = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return out;
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double asymmetry(const Matrix& a) {
  if (a.rows() != a.cols()) return INFINITY;
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

Matrix matrix_power(const Matrix& a, int exponent) {
  Matrix out = Matrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < exponent; ++i) out = out * a;
  return out;
}

Matrix select_rows(const Matrix& a, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = a.row(rows[i]);
  return out;
}

Matrix select_cols(const Matrix& a, std::span<const Index> cols) {
  Matrix out(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(j) = a.col(cols[j]);
  return out;
}

Matrix select_block(const Matrix& a, std::span<const Index> rows,
                    std::span<const Index> cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i)
      out(i, j) = a(rows[i], cols[j]);
  return out;
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

}  // namespace tasksample
