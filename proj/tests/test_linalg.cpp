#include <doctest.h>

#include <cmath>

#include "gnrfm/kernels.hpp"
#include "gnrfm/linalg.hpp"
#include "support.hpp"

using namespace gnrfm;
using testing::gaussian;

TEST_CASE("matrix basics") {
  const Matrix a{{1, 2, 3}, {4, 5, 6}};
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 3);
  CHECK(a.transpose()(2, 1) == 6);
  CHECK(a.leading_cols(2) == Matrix{{1, 2}, {4, 5}});
  CHECK(a.leading_rows(1) == Matrix{{1, 2, 3}});
  CHECK_THROWS_AS(require_same_shape(a, a.transpose(), "x"), DimensionError);
  CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), DimensionError);
  Matrix b = a;
  b(0, 0) = std::nan("");
  CHECK_FALSE(b.all_finite());
  CHECK((a + a)(1, 2) == 12);
  CHECK((a - a) == Matrix(2, 3));
  CHECK((2.0 * a)(0, 1) == 4);
}

TEST_CASE("frobenius_norm examples") {
  CHECK(frobenius_norm(Matrix::identity(2)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(frobenius_norm(Matrix(3, 4)) == 0.0);
  CHECK(frobenius_norm(Matrix{{3, 4}}) == 5.0);
}

TEST_CASE("group_norm_21 examples") {
  CHECK(group_norm_21(Matrix::identity(2)) == 2.0);
  CHECK(group_norm_21(Matrix{{3, 0}, {4, 0}}) == 5.0);
  const Matrix m{{1, 2}, {2, 4}};
  CHECK(group_norm_21(m) == doctest::Approx(testing::naive_21(m)).epsilon(1e-15));
  CHECK(group_norm_21(m) == doctest::Approx(6.7082039325).epsilon(1e-10));
}

TEST_CASE("norm equivalence between l21 and Frobenius") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const std::size_t r = 1 + seed % 7, c = 1 + (seed * 3) % 9;
    const Matrix m = gaussian(r, c, seed);
    const double f = frobenius_norm(m);
    const double g = group_norm_21(m);
    CHECK(g >= f * (1 - 1e-14));
    CHECK(g <= std::sqrt(static_cast<double>(c)) * f * (1 + 1e-14));
  }
}

TEST_CASE("column_soft_threshold examples") {
  const Matrix col{{3}, {4}};
  const Matrix a = column_soft_threshold(col, 1.0);
  CHECK(a(0, 0) == doctest::Approx(2.4).epsilon(1e-15));
  CHECK(a(1, 0) == doctest::Approx(3.2).epsilon(1e-15));
  const Matrix b = column_soft_threshold(col, 6.0);
  CHECK(b(0, 0) == 0.0);
  CHECK(b(1, 0) == 0.0);
  const Matrix m = gaussian(6, 5, 3);
  CHECK(column_soft_threshold(m, 0.0) == m);
  CHECK_THROWS_AS(column_soft_threshold(m, -1e-3), ParameterError);
}

TEST_CASE("column_soft_threshold zero column and output norms") {
  Matrix m = gaussian(8, 6, 11);
  for (std::size_t i = 0; i < 8; ++i) m(i, 2) = 0.0;
  const double tau = 1.3;
  const Matrix p = column_soft_threshold(m, tau);
  for (std::size_t j = 0; j < 6; ++j) {
    const double in = testing::naive_col_norm(m, j);
    const double out = testing::naive_col_norm(p, j);
    CHECK(out == doctest::Approx(std::max(in - tau, 0.0)).epsilon(1e-13));
    if (in <= tau)
      for (std::size_t i = 0; i < 8; ++i) CHECK(p(i, j) == 0.0);
  }
}

TEST_CASE("column_soft_threshold is the proximal map of tau ||.||_21") {
  Rng rng(99);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix m = gaussian(5, 4, 100 + rep);
    const double tau = 0.5 + rep * 0.4;
    const Matrix p = column_soft_threshold(m, tau);
    auto objective = [&](const Matrix& x) {
      return tau * testing::naive_21(x) + 0.5 * std::pow(testing::naive_fro(x - m), 2);
    };
    const double base = objective(p);
    for (int k = 0; k < 100; ++k) {
      Matrix d(5, 4);
      for (double& x : d.values()) x = rng.normal();
      d *= (1e-3 * rng.uniform()) / testing::naive_fro(d);
      CHECK(base <= objective(p + d) + 1e-12);
    }
  }
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  for (int threads : {1, 2, 3, 4}) {
    kernels::set_threads(threads);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const std::size_t m = 3 + seed * 7, k = 2 + seed * 5, n = 1 + seed * 9;
      Matrix a = gaussian(m, k, seed);
      const Matrix b = gaussian(k, n, seed + 50);
      for (std::size_t i = 0; i < m; i += 3) a(i, seed % k) = 0.0;
      CHECK(kernels::matmul(a, b) == kernels::serial::matmul(a, b));
      const Matrix at = gaussian(k, m, seed + 9);
      CHECK(kernels::matmul_tn(at, gaussian(k, n, seed + 3)) ==
            kernels::serial::matmul_tn(at, gaussian(k, n, seed + 3)));
      const Matrix bt = gaussian(n, k, seed + 4);
      CHECK(kernels::matmul_nt(a, bt) == kernels::serial::matmul_nt(a, bt));
      CHECK(kernels::column_sq_norms(a) == kernels::serial::column_sq_norms(a));
    }
  }
  kernels::set_threads(kernels::max_threads());
}

TEST_CASE("kernel products ignore exactly-zero inner terms bit for bit") {
  const Matrix u = gaussian(30, 6, 4);
  const Matrix v = gaussian(6, 20, 5);
  Matrix u2(30, 9), v2(9, 20);
  const std::size_t map[6] = {0, 2, 3, 5, 6, 8};
  for (std::size_t c = 0; c < 6; ++c) {
    for (std::size_t i = 0; i < 30; ++i) u2(i, map[c]) = u(i, c);
    for (std::size_t j = 0; j < 20; ++j) v2(map[c], j) = v(c, j) + 0.0;
  }
  // Rows of v2 opposite the zero columns of u2 hold garbage; they must not matter.
  for (std::size_t j = 0; j < 20; ++j) v2(1, j) = v2(4, j) = v2(7, j) = 1e300;
  CHECK(kernels::matmul(u, v) == kernels::matmul(u2, v2));
}

TEST_CASE("kernels reject inner dimension mismatch") {
  CHECK_THROWS_AS(kernels::matmul(Matrix(2, 3), Matrix(2, 3)), DimensionError);
  CHECK_THROWS_AS(kernels::matmul_tn(Matrix(2, 3), Matrix(3, 3)), DimensionError);
  CHECK_THROWS_AS(kernels::matmul_nt(Matrix(2, 3), Matrix(2, 2)), DimensionError);
}

namespace {

void check_svd(const Matrix& m) {
  const SvdResult s = svd(m);
  const std::size_t k = std::min(m.rows(), m.cols());
  REQUIRE(s.rank() == k);
  CHECK(s.left.rows() == m.rows());
  CHECK(s.right.rows() == m.cols());
  for (std::size_t i = 0; i + 1 < k; ++i) CHECK(s.singulars[i] >= s.singulars[i + 1]);
  for (double x : s.singulars) CHECK(x >= 0.0);
  CHECK(testing::orthonormality_error(s.left) <= 1e-10);
  CHECK(testing::orthonormality_error(s.right) <= 1e-10);
  Matrix ls = s.left;
  for (std::size_t i = 0; i < ls.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) ls(i, j) *= s.singulars[j];
  const Matrix rec = testing::naive_mul(ls, testing::naive_t(s.right));
  CHECK(testing::naive_fro(rec - m) <= 1e-8 * (1 + testing::naive_fro(m)));
}

}  // namespace

TEST_CASE("svd examples") {
  const SvdResult a = svd(Matrix::identity(3));
  for (double x : a.singulars) CHECK(x == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> d{5, 3, 1};
  const SvdResult b = svd(Matrix::diagonal(d));
  CHECK(b.singulars[0] == doctest::Approx(5).epsilon(1e-14));
  CHECK(b.singulars[1] == doctest::Approx(3).epsilon(1e-14));
  CHECK(b.singulars[2] == doctest::Approx(1).epsilon(1e-14));
  const Matrix swap{{0, 1}, {1, 0}};
  const SvdResult c = svd(swap);
  CHECK(c.singulars[0] == doctest::Approx(1).epsilon(1e-15));
  CHECK(c.singulars[1] == doctest::Approx(1).epsilon(1e-15));
  Matrix ls = c.left;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) ls(i, j) *= c.singulars[j];
  CHECK(testing::max_abs_diff(testing::naive_mul(ls, testing::naive_t(c.right)), swap) <= 1e-12);
  CHECK_THROWS_AS(svd(Matrix()), DimensionError);
}

TEST_CASE("svd invariants on seeded matrices up to 50x50") {
  for (std::uint64_t seed = 1; seed <= 24; ++seed) {
    const std::size_t m = 1 + (seed * 13) % 50, n = 1 + (seed * 29) % 50;
    check_svd(gaussian(m, n, seed));
  }
  check_svd(testing::low_rank(40, 30, 4, 5));
  check_svd(testing::low_rank(20, 45, 3, 6));
  check_svd(Matrix(7, 5));
  Matrix spiky(12, 9);
  spiky(3, 4) = 1e8;
  spiky(0, 0) = 1e-8;
  check_svd(spiky);
}

TEST_CASE("svd singular values agree with eigenvalues of the Gram matrix") {
  const Matrix m = gaussian(15, 9, 42);
  const SvdResult s = svd(m);
  const EigResult e = symmetric_eig(testing::naive_mul(testing::naive_t(m), m));
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(s.singulars[i] * s.singulars[i] == doctest::Approx(e.values[i]).epsilon(1e-10));
}

TEST_CASE("svd is deterministic") {
  const Matrix m = gaussian(33, 21, 8);
  const SvdResult a = svd(m), b = svd(m);
  CHECK(a.left == b.left);
  CHECK(a.right == b.right);
  CHECK(a.singulars == b.singulars);
}

TEST_CASE("numerical rank and truncate") {
  SvdResult s = svd(testing::low_rank(20, 15, 4, 3));
  CHECK(s.numerical_rank(1e-10) == 4);
  s.truncate(4);
  CHECK(s.rank() == 4);
  CHECK(s.left.cols() == 4);
  CHECK(s.right.cols() == 4);
}

TEST_CASE("pseudoinverse examples") {
  const Matrix q = orthonormal_q(gaussian(7, 3, 1));
  CHECK(testing::max_abs_diff(pseudoinverse(q), q.transpose()) <= 1e-12);
  const Matrix z = pseudoinverse(Matrix(3, 2));
  CHECK(z.rows() == 2);
  CHECK(z.cols() == 3);
  CHECK(z == Matrix(2, 3));
  const Matrix p = pseudoinverse(Matrix{{2, 0}, {0, 0}});
  CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p(0, 1) == 0.0);
  CHECK(p(1, 0) == 0.0);
  CHECK(p(1, 1) == 0.0);
}

TEST_CASE("pseudoinverse Penrose identity on seeded matrices") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t m = 2 + (seed * 11) % 48, n = 2 + (seed * 17) % 48;
    const Matrix a = seed % 3 == 0 ? testing::low_rank(m, n, 2, seed) : gaussian(m, n, seed);
    const Matrix ap = pseudoinverse(a);
    const Matrix r = testing::naive_mul(testing::naive_mul(a, ap), a);
    CHECK(testing::naive_fro(r - a) <= 1e-8 * (1 + testing::naive_fro(a)));
  }
}

TEST_CASE("solve_spd examples and residual bound") {
  const Matrix b = gaussian(4, 3, 2);
  CHECK(testing::max_abs_diff(solve_spd(Matrix::identity(4), b), b) == 0.0);
  const std::vector<double> d{2, 4};
  const Matrix x = solve_spd(Matrix::diagonal(d), Matrix{{2}, {8}});
  CHECK(x(0, 0) == doctest::Approx(1).epsilon(1e-15));
  CHECK(x(1, 0) == doctest::Approx(2).epsilon(1e-15));
  for (std::size_t n : {5, 17, 50}) {
    const Matrix g = gaussian(n, n, n);
    const Matrix a = testing::naive_mul(g, testing::naive_t(g)) + Matrix::identity(n);
    const Matrix rhs = gaussian(n, 4, n + 1);
    const Matrix sol = solve_spd(a, rhs);
    CHECK(testing::naive_fro(testing::naive_mul(a, sol) - rhs) <= 1e-8 * (1 + testing::naive_fro(rhs)));
  }
  CHECK_THROWS_AS(solve_spd(Matrix{{1, 2}, {2, 1}}, Matrix{{1}, {1}}), NumericalError);
  CHECK_THROWS_AS(solve_spd(Matrix::identity(2), Matrix(3, 1)), DimensionError);
}

TEST_CASE("symmetric_eig examples") {
  const EigResult a = symmetric_eig(Matrix::identity(4));
  for (double v : a.values) CHECK(v == doctest::Approx(1).epsilon(1e-15));
  const std::vector<double> d{3, 1};
  const EigResult b = symmetric_eig(Matrix::diagonal(d));
  CHECK(b.values[0] == doctest::Approx(3).epsilon(1e-15));
  CHECK(b.values[1] == doctest::Approx(1).epsilon(1e-15));
  CHECK(std::abs(b.vectors(0, 0)) == doctest::Approx(1).epsilon(1e-15));
  CHECK(std::abs(b.vectors(1, 1)) == doctest::Approx(1).epsilon(1e-15));
  // det([[2-l,1],[1,2-l]]) = (l-1)(l-3)
  const EigResult c = symmetric_eig(Matrix{{2, 1}, {1, 2}});
  CHECK(c.values[0] == doctest::Approx(3).epsilon(1e-14));
  CHECK(c.values[1] == doctest::Approx(1).epsilon(1e-14));
  CHECK_THROWS_AS(symmetric_eig(Matrix{{1, 2}, {0, 1}}), ParameterError);
  CHECK_THROWS_AS(symmetric_eig(Matrix(2, 3)), DimensionError);
}

TEST_CASE("symmetric_eig residual and orthonormality") {
  for (std::size_t n : {1, 2, 7, 30, 64}) {
    const Matrix g = gaussian(n, n, 7 * n);
    const Matrix a = g + g.transpose();
    const EigResult e = symmetric_eig(a);
    for (std::size_t i = 0; i + 1 < n; ++i) CHECK(e.values[i] >= e.values[i + 1]);
    CHECK(testing::orthonormality_error(e.vectors) <= 1e-10);
    Matrix lv = e.vectors;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) lv(i, j) *= e.values[j];
    CHECK(testing::naive_fro(testing::naive_mul(a, e.vectors) - lv) <= 1e-8 * (1 + testing::naive_fro(a)));
  }
  // Repeated eigenvalues: a block of zeros and a block of ones.
  Matrix p(6, 6);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) p(i, j) = 1.0 / 3.0;
  const EigResult e = symmetric_eig(p);
  CHECK(e.values[0] == doctest::Approx(1).epsilon(1e-14));
  for (std::size_t i = 1; i < 6; ++i) CHECK(std::abs(e.values[i]) <= 1e-14);
}

TEST_CASE("spectral_norm_sq examples and cross-check") {
  CHECK(spectral_norm_sq(Matrix::identity(5)) == doctest::Approx(1).epsilon(1e-12));
  CHECK(spectral_norm_sq(Matrix{{0, 2}, {0, 0}}) == doctest::Approx(4).epsilon(1e-12));
  CHECK(spectral_norm_sq(Matrix(3, 4)) == 0.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t m = 1 + (seed * 5) % 40, n = 1 + (seed * 7) % 60;
    const Matrix a = seed == 1 ? gaussian(10, 7, 1) : gaussian(m, n, seed);
    const double s = svd(a).singulars.front();
    CHECK(spectral_norm_sq(a) == doctest::Approx(s * s).epsilon(1e-8));
  }
  // Near-degenerate top singular values.
  const std::vector<double> d{3, 3 - 1e-9, 1, 0.5};
  CHECK(spectral_norm_sq(Matrix::diagonal(d)) == doctest::Approx(9).epsilon(1e-8));
}

TEST_CASE("spectral_norm_sq is unchanged by appended zero rows") {
  const Matrix a = gaussian(12, 40, 77);
  Matrix b(17, 40);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 40; ++j) b(i < 6 ? i : i + 5, j) = a(i, j);
  CHECK(spectral_norm_sq(a) == spectral_norm_sq(b));
}

TEST_CASE("orthonormal_q") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t n = 1 + seed % 9, m = n + seed % 5;
    const Matrix a = gaussian(m, n, seed);
    int det = 0;
    const Matrix q = orthonormal_q(a, &det);
    CHECK(testing::orthonormality_error(q) <= 1e-12);
    // Q^T A is upper triangular with a nonnegative diagonal.
    const Matrix r = testing::naive_mul(testing::naive_t(q), a);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(r(i, i) >= 0.0);
      for (std::size_t j = 0; j < i; ++j) CHECK(std::abs(r(i, j)) <= 1e-10);
    }
    if (m == n) {
      // Independent determinant: Gaussian elimination with partial pivoting.
      Matrix w = q;
      double dv = 1.0;
      for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t i = c + 1; i < n; ++i)
          if (std::abs(w(i, c)) > std::abs(w(piv, c))) piv = i;
        if (piv != c) {
          for (std::size_t j = 0; j < n; ++j) std::swap(w(c, j), w(piv, j));
          dv = -dv;
        }
        dv *= w(c, c);
        for (std::size_t i = c + 1; i < n; ++i) {
          const double f = w(i, c) / w(c, c);
          for (std::size_t j = c; j < n; ++j) w(i, j) -= f * w(c, j);
        }
      }
      CHECK(dv == doctest::Approx(static_cast<double>(det)).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(orthonormal_q(Matrix(2, 3)), DimensionError);
}
