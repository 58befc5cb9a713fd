#pragma once

#include <cstddef>
#include <vector>

#include "gnrfm/matrix.hpp"

namespace gnrfm {

/// Thin SVD M = left * diag(singulars) * right^T with k = min(rows, cols)
/// (or fewer after truncate()). Singular values are nonincreasing.
struct SvdResult {
  Matrix left;                  // rows x k, orthonormal columns
  std::vector<double> singulars;  // length k
  Matrix right;                 // cols x k, orthonormal columns

  std::size_t rank() const noexcept { return singulars.size(); }
  /// Keeps the leading `k` triplets.
  void truncate(std::size_t k);
  /// Number of singular values strictly above rel_tol * sigma_max.
  std::size_t numerical_rank(double rel_tol) const noexcept;
};

struct EigResult {
  std::vector<double> values;  // nonincreasing
  Matrix vectors;              // column i belongs to values[i]
};

double frobenius_norm(const Matrix& m);
double frobenius_norm_sq(const Matrix& m);

/// Sum of the Euclidean norms of the columns.
double group_norm_21(const Matrix& m);

/// Proximal operator of tau * ||.||_{2,1}: each column is scaled by
/// max(||c|| - tau, 0) / ||c||. Columns with norm <= tau (including zero
/// columns) come out exactly zero.
Matrix column_soft_threshold(const Matrix& m, double tau);

/// Golub-Kahan bidiagonalisation followed by implicit-shift QR on the
/// bidiagonal. Deterministic. Throws NumericalError if a singular value
/// fails to converge within the iteration cap.
SvdResult svd(const Matrix& m);

/// Moore-Penrose pseudoinverse; singular values <= rel_tol * sigma_max are
/// dropped. rel_tol <= 0 selects 1e-12 * max(rows, cols).
Matrix pseudoinverse(const Matrix& m, double rel_tol = 0.0);

/// Lower Cholesky factor of a symmetric positive definite matrix.
Matrix cholesky(const Matrix& a);

/// Solves A X = B for symmetric positive definite A via Cholesky.
Matrix solve_spd(const Matrix& a, const Matrix& b);

/// Householder tridiagonalisation + implicit QL. The input is symmetrised as
/// (M + M^T) / 2; asymmetry above 1e-10 * (1 + ||M||_F) is rejected.
EigResult symmetric_eig(const Matrix& m);

/// Largest squared singular value of M.
///
/// Lanczos iteration on M^T M with full reorthogonalisation. All vectors
/// live in R^cols, so appending exactly-zero rows to M does not change a
/// single bit of the result.
double spectral_norm_sq(const Matrix& m);

/// Householder QR of a tall matrix (rows >= cols). Returns the explicit
/// rows x cols Q with columns multiplied by sign(R_jj) so that diag(R) >= 0.
/// For square input, `det_sign` (if given) receives det(Q) = +1 or -1.
Matrix orthonormal_q(const Matrix& a, int* det_sign = nullptr);

}  // namespace gnrfm
