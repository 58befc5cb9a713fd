#include "gnrfm/kernels.hpp"

#include <omp.h>

#include <string>

namespace gnrfm::kernels {

namespace {

void check_inner(std::size_t a, std::size_t b, const char* what, const Matrix& x,
                 const Matrix& y) {
  if (a != b)
    throw DimensionError(std::string(what) + ": inner dimension mismatch " + shape_string(x) +
                         " vs " + shape_string(y));
}

// Row-sweep accumulation C(i,:) += A(i,k) * B(k,:), k ascending.
void gemm_rows(const Matrix& a, const Matrix& b, Matrix& c) {
  const auto m = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t inner = a.cols();
  const std::size_t n = b.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double* ci = c.data() + static_cast<std::size_t>(i) * n;
    const double* ai = a.data() + static_cast<std::size_t>(i) * inner;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "matmul", a, b);
  Matrix c(a.rows(), b.cols());
  gemm_rows(a, b, c);
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn", a, b);
  const std::size_t inner = a.rows();
  const auto k_out = static_cast<std::ptrdiff_t>(a.cols());
  const std::size_t n = b.cols();
  Matrix c(a.cols(), n);
  // Each thread owns a block of output rows and sweeps the inner index in order.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < k_out; ++k) {
    double* ck = c.data() + static_cast<std::size_t>(k) * n;
    for (std::size_t i = 0; i < inner; ++i) {
      const double aik = a(i, static_cast<std::size_t>(k));
      if (aik == 0.0) continue;
      const double* bi = b.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) ck[j] += aik * bi[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt", a, b);
  const Matrix bt = b.transpose();
  Matrix c(a.rows(), b.rows());
  gemm_rows(a, bt, c);
  return c;
}

std::vector<double> column_sq_norms(const Matrix& m) {
  const std::size_t rows = m.rows();
  const auto cols = static_cast<std::ptrdiff_t>(m.cols());
  std::vector<double> out(m.cols(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      const double x = m(i, static_cast<std::size_t>(j));
      s += x * x;
    }
    out[static_cast<std::size_t>(j)] = s;
  }
  return out;
}

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "serial::matmul", a, b);
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "serial::matmul_tn", a, b);
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.cols(); ++k)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, k) * b(i, j);
      c(k, j) = s;
    }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "serial::matmul_nt", a, b);
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      c(i, j) = s;
    }
  return c;
}

std::vector<double> column_sq_norms(const Matrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) out[j] += m(i, j) * m(i, j);
  return out;
}

}  // namespace serial

}  // namespace gnrfm::kernels
