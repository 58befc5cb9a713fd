#include "gnrfm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "gnrfm/kernels.hpp"

namespace gnrfm {

void SvdResult::truncate(std::size_t k) {
  if (k >= singulars.size()) return;
  left = left.leading_cols(k);
  right = right.leading_cols(k);
  singulars.resize(k);
}

std::size_t SvdResult::numerical_rank(double rel_tol) const noexcept {
  if (singulars.empty() || singulars.front() <= 0.0) return 0;
  const double cut = rel_tol * singulars.front();
  std::size_t r = 0;
  while (r < singulars.size() && singulars[r] > cut) ++r;
  return r;
}

double frobenius_norm_sq(const Matrix& m) {
  double s = 0.0;
  for (double x : m.values()) s += x * x;
  return s;
}

double frobenius_norm(const Matrix& m) { return std::sqrt(frobenius_norm_sq(m)); }

double group_norm_21(const Matrix& m) {
  double s = 0.0;
  for (double c : kernels::column_sq_norms(m)) s += std::sqrt(c);
  return s;
}

Matrix column_soft_threshold(const Matrix& m, double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw ParameterError("column_soft_threshold: tau must be finite and >= 0, got " +
                         std::to_string(tau));
  const std::vector<double> sq = kernels::column_sq_norms(m);
  std::vector<double> scale(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const double norm = std::sqrt(sq[j]);
    scale[j] = norm > tau ? (norm - tau) / norm : 0.0;
  }
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto src = m.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) dst[j] = scale[j] == 0.0 ? 0.0 : src[j] * scale[j];
  }
  return out;
}

Matrix pseudoinverse(const Matrix& m, double rel_tol) {
  if (rel_tol <= 0.0) rel_tol = 1e-12 * static_cast<double>(std::max(m.rows(), m.cols()));
  Matrix out(m.cols(), m.rows());
  if (m.empty()) return out;
  const SvdResult s = svd(m);
  const std::size_t r = s.numerical_rank(rel_tol);
  // out = right(:, :r) * diag(1/s) * left(:, :r)^T
  Matrix scaled(m.cols(), r);
  for (std::size_t i = 0; i < m.cols(); ++i)
    for (std::size_t k = 0; k < r; ++k) scaled(i, k) = s.right(i, k) / s.singulars[k];
  return kernels::matmul_nt(scaled, s.left.leading_cols(r));
}

Matrix cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("cholesky: matrix must be square");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t p = 0; p < j; ++p) d -= l(j, p) * l(j, p);
    if (!(d > 0.0) || !std::isfinite(d))
      throw NumericalError("cholesky: matrix is not positive definite (pivot " +
                           std::to_string(j) + " = " + std::to_string(d) + ")");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= l(i, p) * l(j, p);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows())
    throw DimensionError("solve_spd: shapes " + shape_string(a) + " and " + shape_string(b));
  const Matrix l = cholesky(a);
  const std::size_t n = a.rows();
  const std::size_t w = b.cols();
  Matrix x = b;
  // Forward: L Y = B, row by row so the right-hand sides stream contiguously.
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = x.row(i);
    for (std::size_t p = 0; p < i; ++p) {
      const double lip = l(i, p);
      if (lip == 0.0) continue;
      const auto xp = x.row(p);
      for (std::size_t j = 0; j < w; ++j) xi[j] -= lip * xp[j];
    }
    const double inv = l(i, i);
    for (std::size_t j = 0; j < w; ++j) xi[j] /= inv;
  }
  // Backward: L^T X = Y.
  for (std::size_t ii = n; ii-- > 0;) {
    auto xi = x.row(ii);
    for (std::size_t p = ii + 1; p < n; ++p) {
      const double lpi = l(p, ii);
      if (lpi == 0.0) continue;
      const auto xp = x.row(p);
      for (std::size_t j = 0; j < w; ++j) xi[j] -= lpi * xp[j];
    }
    const double diag = l(ii, ii);
    for (std::size_t j = 0; j < w; ++j) xi[j] /= diag;
  }
  return x;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// w = M^T (M q), zero rows of M contribute nothing.
void gram_apply(const Matrix& m, const std::vector<double>& q, std::vector<double>& w) {
  std::fill(w.begin(), w.end(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double y = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) y += row[c] * q[c];
    if (y == 0.0) continue;
    for (std::size_t c = 0; c < row.size(); ++c) w[c] += row[c] * y;
  }
}

}  // namespace

double spectral_norm_sq(const Matrix& m) {
  const std::size_t n = m.cols();
  if (m.empty()) return 0.0;

  std::vector<std::vector<double>> basis;
  std::vector<double> alphas;
  std::vector<double> betas;

  std::vector<double> q(n);
  std::mt19937_64 gen(0x9e3779b97f4a7c15ULL);
  for (double& x : q) x = 0.5 + static_cast<double>(gen() >> 11) * 0x1.0p-53;
  const double qn = std::sqrt(dot(q, q));
  for (double& x : q) x /= qn;

  std::vector<double> w(n);
  double theta = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    gram_apply(m, q, w);
    const double alpha = dot(q, w);
    for (std::size_t c = 0; c < n; ++c) w[c] -= alpha * q[c];
    if (!basis.empty()) {
      const double bprev = betas.back();
      const auto& qp = basis.back();
      for (std::size_t c = 0; c < n; ++c) w[c] -= bprev * qp[c];
    }
    basis.push_back(q);
    alphas.push_back(alpha);
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double h = dot(b, w);
        for (std::size_t c = 0; c < n; ++c) w[c] -= h * b[c];
      }
    const double beta = std::sqrt(dot(w, w));

    const std::size_t k = alphas.size();
    const bool check = k <= 40 || k % 8 == 0 || beta == 0.0 || k == n;
    if (check) {
      Matrix t(k, k);
      for (std::size_t i = 0; i < k; ++i) {
        t(i, i) = alphas[i];
        if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = betas[i];
      }
      const EigResult e = symmetric_eig(t);
      theta = e.values.front();
      const double resid = beta * std::abs(e.vectors(k - 1, 0));
      if (theta <= 0.0) {
        if (beta == 0.0) return 0.0;
      } else if (resid <= 1e-10 * theta || beta <= 1e-14 * theta) {
        return theta;
      }
    }
    if (k == n) break;
    betas.push_back(beta);
    for (std::size_t c = 0; c < n; ++c) q[c] = w[c] / beta;
  }
  return theta;
}

Matrix orthonormal_q(const Matrix& a, int* det_sign) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw DimensionError("orthonormal_q: needs rows >= cols, got " + shape_string(a));
  // Column-major working copy: col k at work[k*m].
  std::vector<double> work(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) work[j * m + i] = a(i, j);

  std::vector<std::vector<double>> reflectors(n);
  std::vector<double> rdiag(n);
  int det = 1;
  for (std::size_t k = 0; k < n; ++k) {
    double* ck = work.data() + k * m;
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm += ck[i] * ck[i];
    norm = std::sqrt(norm);
    const double alpha = ck[k] > 0.0 ? -norm : norm;
    std::vector<double> v(ck + k, ck + m);
    v[0] -= alpha;
    double vv = 0.0;
    for (double x : v) vv += x * x;
    rdiag[k] = alpha;
    if (vv == 0.0) continue;
    det = -det;
    for (std::size_t j = k; j < n; ++j) {
      double* cj = work.data() + j * m;
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * cj[k + i];
      const double f = 2.0 * s / vv;
      for (std::size_t i = 0; i < v.size(); ++i) cj[k + i] -= f * v[i];
    }
    for (double& x : v) x /= std::sqrt(vv);
    reflectors[k] = std::move(v);
  }

  // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of I.
  std::vector<double> q(m * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) q[j * m + j] = 1.0;
  for (std::size_t kk = n; kk-- > 0;) {
    const auto& v = reflectors[kk];
    if (v.empty()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double* cj = q.data() + j * m;
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * cj[kk + i];
      if (s == 0.0) continue;
      for (std::size_t i = 0; i < v.size(); ++i) cj[kk + i] -= 2.0 * s * v[i];
    }
  }

  Matrix out(m, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double sign = rdiag[j] < 0.0 ? -1.0 : 1.0;
    if (sign < 0.0) det = -det;
    for (std::size_t i = 0; i < m; ++i) out(i, j) = sign * q[j * m + i];
  }
  if (det_sign) *det_sign = det;
  return out;
}

}  // namespace gnrfm
