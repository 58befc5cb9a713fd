#pragma once

#include <cmath>
#include <cstdint>

#include "gnrfm/matrix.hpp"
#include "gnrfm/rng.hpp"

namespace testing {

inline gnrfm::Matrix gaussian(std::size_t r, std::size_t c, std::uint64_t seed) {
  gnrfm::Rng rng(seed);
  gnrfm::Matrix m(r, c);
  for (double& x : m.values()) x = rng.normal();
  return m;
}

// Straight loops, deliberately independent of the library kernels.
inline gnrfm::Matrix naive_mul(const gnrfm::Matrix& a, const gnrfm::Matrix& b) {
  gnrfm::Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0.0L;
      for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      c(i, j) = static_cast<double>(s);
    }
  return c;
}

inline gnrfm::Matrix naive_t(const gnrfm::Matrix& a) {
  gnrfm::Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline double naive_fro(const gnrfm::Matrix& a) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += static_cast<long double>(a(i, j)) * a(i, j);
  return static_cast<double>(std::sqrt(s));
}

inline double naive_col_norm(const gnrfm::Matrix& a, std::size_t j) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.rows(); ++i) s += static_cast<long double>(a(i, j)) * a(i, j);
  return static_cast<double>(std::sqrt(s));
}

inline double naive_21(const gnrfm::Matrix& a) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) s += naive_col_norm(a, j);
  return s;
}

inline double max_abs_diff(const gnrfm::Matrix& a, const gnrfm::Matrix& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

inline double orthonormality_error(const gnrfm::Matrix& q) {
  const gnrfm::Matrix g = naive_mul(naive_t(q), q);
  double e = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) e = std::max(e, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return e;
}

// Rank-r product of seeded Gaussians.
inline gnrfm::Matrix low_rank(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed) {
  return naive_mul(gaussian(m, r, seed), gaussian(r, n, seed + 7777));
}

}  // namespace testing
