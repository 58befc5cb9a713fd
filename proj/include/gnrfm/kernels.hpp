#pragma once

#include <vector>

#include "gnrfm/matrix.hpp"

// Dense products used in every solver step.
//
// Every output entry is accumulated over the inner index in ascending order,
// starting from +0.0, in both the OpenMP kernels and the serial reference.
// Threads only partition output rows, so the parallel results are
// bit-identical to the serial ones for any thread count. The same ordering
// makes products insensitive to exactly-zero factor columns/rows, which the
// prune-equivalence property of the solver relies on.
namespace gnrfm::kernels {

/// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
/// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// C = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// Sum of squares of each column, accumulated top to bottom.
std::vector<double> column_sq_norms(const Matrix& m);

/// Number of OpenMP threads the kernels will use.
int max_threads();
/// Overrides the OpenMP thread count (n <= 0 leaves it unchanged).
void set_threads(int n);

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
std::vector<double> column_sq_norms(const Matrix& m);

}  // namespace serial

}  // namespace gnrfm::kernels
