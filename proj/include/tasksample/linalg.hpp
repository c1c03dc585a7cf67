#pragma once

#include "tasksample/types.hpp"

#include <span>
#include <vector>

namespace tasksample {

struct PseudoInverse {
  Matrix matrix;
  Index rank = 0;
};

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// rcond * max(rows, cols) * sigma_max are treated as zero.
PseudoInverse pseudo_inverse(const Matrix& a, double rcond = 1e-12);

double spectral_norm(const Matrix& a);

/// Largest |a_ij - a_ji|.
double asymmetry(const Matrix& a);

Matrix matrix_power(const Matrix& a, int exponent);

/// Rows (and optionally columns) picked by index, in the given order.
Matrix select_rows(const Matrix& a, std::span<const Index> rows);
Matrix select_cols(const Matrix& a, std::span<const Index> cols);
Matrix select_block(const Matrix& a, std::span<const Index> rows,
                    std::span<const Index> cols);

bool all_finite(const Matrix& a);

}  // namespace tasksample
