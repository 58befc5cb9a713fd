// Golub-Kahan-Reinsch SVD. Structure follows the classic LINPACK dsvdc
// routine: Householder bidiagonalisation, explicit accumulation of the left
// and right transforms, then implicit-shift QR sweeps on the bidiagonal with
// deflation. Works on column-major buffers so column operations are
// contiguous.

#include <algorithm>
#include <cmath>
#include <string>

#include "gnrfm/linalg.hpp"

namespace gnrfm {

namespace {

constexpr int kMaxSweepsPerValue = 100;

struct ColMajor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;
  ColMajor(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return v[j * rows + i]; }
  double* col(std::size_t j) { return v.data() + j * rows; }
};

void rotate(double* x, double* y, std::size_t n, double cs, double sn) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = cs * x[i] + sn * y[i];
    y[i] = -sn * x[i] + cs * y[i];
    x[i] = t;
  }
}

// Thin SVD for m >= n.
SvdResult svd_tall(const Matrix& input) {
  const std::size_t m = input.rows();
  const std::size_t n = input.cols();
  ColMajor a(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = input(i, j);

  const std::size_t nu = n;
  std::vector<double> s(std::min(m + 1, n), 0.0);
  ColMajor u(m, nu);
  ColMajor v(n, n);
  std::vector<double> e(n, 0.0);
  std::vector<double> work(m, 0.0);

  const std::size_t nct = std::min(m - 1, n);
  const std::size_t nrt = n >= 2 ? std::min(n - 2, m) : 0;
  for (std::size_t k = 0; k < std::max(nct, nrt); ++k) {
    if (k < nct) {
      double* ak = a.col(k);
      s[k] = 0.0;
      for (std::size_t i = k; i < m; ++i) s[k] = std::hypot(s[k], ak[i]);
      if (s[k] != 0.0) {
        if (ak[k] < 0.0) s[k] = -s[k];
        for (std::size_t i = k; i < m; ++i) ak[i] /= s[k];
        ak[k] += 1.0;
      }
      s[k] = -s[k];
    }
    for (std::size_t j = k + 1; j < n; ++j) {
      double* aj = a.col(j);
      if (k < nct && s[k] != 0.0) {
        const double* ak = a.col(k);
        double t = 0.0;
        for (std::size_t i = k; i < m; ++i) t += ak[i] * aj[i];
        t = -t / ak[k];
        for (std::size_t i = k; i < m; ++i) aj[i] += t * ak[i];
      }
      e[j] = aj[k];
    }
    if (k < nct) {
      const double* ak = a.col(k);
      double* uk = u.col(k);
      for (std::size_t i = k; i < m; ++i) uk[i] = ak[i];
    }
    if (k < nrt) {
      e[k] = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) e[k] = std::hypot(e[k], e[i]);
      if (e[k] != 0.0) {
        if (e[k + 1] < 0.0) e[k] = -e[k];
        for (std::size_t i = k + 1; i < n; ++i) e[i] /= e[k];
        e[k + 1] += 1.0;
      }
      e[k] = -e[k];
      if (k + 1 < m && e[k] != 0.0) {
        for (std::size_t i = k + 1; i < m; ++i) work[i] = 0.0;
        for (std::size_t j = k + 1; j < n; ++j) {
          const double* aj = a.col(j);
          for (std::size_t i = k + 1; i < m; ++i) work[i] += e[j] * aj[i];
        }
        for (std::size_t j = k + 1; j < n; ++j) {
          const double t = -e[j] / e[k + 1];
          double* aj = a.col(j);
          for (std::size_t i = k + 1; i < m; ++i) aj[i] += t * work[i];
        }
      }
      double* vk = v.col(k);
      for (std::size_t i = k + 1; i < n; ++i) vk[i] = e[i];
    }
  }

  // Final bidiagonal of order p.
  std::size_t p = std::min(n, m + 1);
  if (nct < n) s[nct] = a(nct, nct);
  if (m < p) s[p - 1] = 0.0;
  if (nrt + 1 < p) e[nrt] = a(nrt, p - 1);
  e[p - 1] = 0.0;

  for (std::size_t j = nct; j < nu; ++j) {
    double* uj = u.col(j);
    std::fill(uj, uj + m, 0.0);
    uj[j] = 1.0;
  }
  for (std::size_t kk = nct; kk-- > 0;) {
    double* uk = u.col(kk);
    if (s[kk] != 0.0) {
      for (std::size_t j = kk + 1; j < nu; ++j) {
        double* uj = u.col(j);
        double t = 0.0;
        for (std::size_t i = kk; i < m; ++i) t += uk[i] * uj[i];
        t = -t / uk[kk];
        for (std::size_t i = kk; i < m; ++i) uj[i] += t * uk[i];
      }
      for (std::size_t i = kk; i < m; ++i) uk[i] = -uk[i];
      uk[kk] = 1.0 + uk[kk];
      for (std::size_t i = 0; i < kk; ++i) uk[i] = 0.0;
    } else {
      std::fill(uk, uk + m, 0.0);
      uk[kk] = 1.0;
    }
  }

  for (std::size_t kk = n; kk-- > 0;) {
    double* vk = v.col(kk);
    if (kk < nrt && e[kk] != 0.0) {
      for (std::size_t j = kk + 1; j < nu; ++j) {
        double* vj = v.col(j);
        double t = 0.0;
        for (std::size_t i = kk + 1; i < n; ++i) t += vk[i] * vj[i];
        t = -t / vk[kk + 1];
        for (std::size_t i = kk + 1; i < n; ++i) vj[i] += t * vk[i];
      }
    }
    std::fill(vk, vk + n, 0.0);
    vk[kk] = 1.0;
  }

  // Implicit-shift QR on the bidiagonal (s, e).
  const std::size_t pp = p - 1;
  int iter = 0;
  constexpr double eps = 0x1.0p-52;
  constexpr double tiny = 0x1.0p-966;
  while (p > 0) {
    if (iter > kMaxSweepsPerValue)
      throw NumericalError("svd: no convergence after " + std::to_string(kMaxSweepsPerValue) +
                           " QR sweeps for singular value " + std::to_string(p - 1) + " of " +
                           std::to_string(m) + "x" + std::to_string(n) + " matrix");
    // kase 1: s(p) and e[k-1] negligible and k<p
    // kase 2: s(k) negligible and k<p
    // kase 3: e[k-1] negligible, k<p, s(k..p) not negligible (QR step)
    // kase 4: e(p-1) negligible (convergence)
    std::ptrdiff_t k = static_cast<std::ptrdiff_t>(p) - 2;
    for (; k >= 0; --k) {
      const auto uk = static_cast<std::size_t>(k);
      if (std::abs(e[uk]) <= tiny + eps * (std::abs(s[uk]) + std::abs(s[uk + 1]))) {
        e[uk] = 0.0;
        break;
      }
    }
    int kase;
    if (k == static_cast<std::ptrdiff_t>(p) - 2) {
      kase = 4;
    } else {
      std::ptrdiff_t ks = static_cast<std::ptrdiff_t>(p) - 1;
      for (; ks > k; --ks) {
        const auto uks = static_cast<std::size_t>(ks);
        const double t = (ks != static_cast<std::ptrdiff_t>(p) ? std::abs(e[uks]) : 0.0) +
                         (ks != k + 1 ? std::abs(e[uks - 1]) : 0.0);
        if (std::abs(s[uks]) <= tiny + eps * t) {
          s[uks] = 0.0;
          break;
        }
      }
      if (ks == k) {
        kase = 3;
      } else if (ks == static_cast<std::ptrdiff_t>(p) - 1) {
        kase = 1;
      } else {
        kase = 2;
        k = ks;
      }
    }
    ++k;
    const auto lo = static_cast<std::size_t>(k);

    switch (kase) {
      case 1: {  // deflate negligible s(p)
        double f = e[p - 2];
        e[p - 2] = 0.0;
        for (std::size_t j = p - 1; j-- > lo;) {
          double t = std::hypot(s[j], f);
          const double cs = s[j] / t;
          const double sn = f / t;
          s[j] = t;
          if (j != lo) {
            f = -sn * e[j - 1];
            e[j - 1] = cs * e[j - 1];
          }
          rotate(v.col(j), v.col(p - 1), n, cs, sn);
        }
      } break;
      case 2: {  // split at negligible s(k)
        double f = e[lo - 1];
        e[lo - 1] = 0.0;
        for (std::size_t j = lo; j < p; ++j) {
          double t = std::hypot(s[j], f);
          const double cs = s[j] / t;
          const double sn = f / t;
          s[j] = t;
          f = -sn * e[j];
          e[j] = cs * e[j];
          rotate(u.col(j), u.col(lo - 1), m, cs, sn);
        }
      } break;
      case 3: {  // one QR step
        const double scale =
            std::max({std::abs(s[p - 1]), std::abs(s[p - 2]), std::abs(e[p - 2]),
                      std::abs(s[lo]), std::abs(e[lo])});
        const double sp = s[p - 1] / scale;
        const double spm1 = s[p - 2] / scale;
        const double epm1 = e[p - 2] / scale;
        const double sk = s[lo] / scale;
        const double ek = e[lo] / scale;
        const double b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / 2.0;
        const double c = (sp * epm1) * (sp * epm1);
        double shift = 0.0;
        if (b != 0.0 || c != 0.0) {
          shift = std::sqrt(b * b + c);
          if (b < 0.0) shift = -shift;
          shift = c / (b + shift);
        }
        double f = (sk + sp) * (sk - sp) + shift;
        double g = sk * ek;
        for (std::size_t j = lo; j < p - 1; ++j) {
          double t = std::hypot(f, g);
          double cs = f / t;
          double sn = g / t;
          if (j != lo) e[j - 1] = t;
          f = cs * s[j] + sn * e[j];
          e[j] = cs * e[j] - sn * s[j];
          g = sn * s[j + 1];
          s[j + 1] = cs * s[j + 1];
          rotate(v.col(j), v.col(j + 1), n, cs, sn);
          t = std::hypot(f, g);
          cs = f / t;
          sn = g / t;
          s[j] = t;
          f = cs * e[j] + sn * s[j + 1];
          s[j + 1] = -sn * e[j] + cs * s[j + 1];
          g = sn * e[j + 1];
          e[j + 1] = cs * e[j + 1];
          if (j < m - 1) rotate(u.col(j), u.col(j + 1), m, cs, sn);
        }
        e[p - 2] = f;
        ++iter;
      } break;
      case 4: {  // convergence: make s(k) nonnegative, restore ordering
        std::size_t kk = lo;
        if (s[kk] <= 0.0) {
          s[kk] = s[kk] < 0.0 ? -s[kk] : 0.0;
          double* vk = v.col(kk);
          for (std::size_t i = 0; i <= pp; ++i) vk[i] = -vk[i];
        }
        while (kk < pp) {
          if (s[kk] >= s[kk + 1]) break;
          std::swap(s[kk], s[kk + 1]);
          if (kk < n - 1) std::swap_ranges(v.col(kk), v.col(kk) + n, v.col(kk + 1));
          if (kk < m - 1) std::swap_ranges(u.col(kk), u.col(kk) + m, u.col(kk + 1));
          ++kk;
        }
        iter = 0;
        --p;
      } break;
    }
  }

  SvdResult out;
  out.singulars.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
  out.left = Matrix(m, n);
  out.right = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) out.left(i, j) = u(i, j);
    for (std::size_t i = 0; i < n; ++i) out.right(i, j) = v(i, j);
  }
  return out;
}

}  // namespace

SvdResult svd(const Matrix& m) {
  if (m.empty()) throw DimensionError("svd: empty matrix");
  if (m.rows() >= m.cols()) return svd_tall(m);
  SvdResult t = svd_tall(m.transpose());
  std::swap(t.left, t.right);
  return t;
}

}  // namespace gnrfm
