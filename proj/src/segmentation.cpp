#include "gnrfm/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gnrfm/kernels.hpp"
#include "gnrfm/linalg.hpp"

namespace gnrfm {

namespace {

// Unit-normalizes rows. Rows whose norm is at most rel_tol times the largest
// row norm are set to exactly zero (rounding residue of a zero row).
void normalize_rows(Matrix& m, double rel_tol, std::size_t* zero_rows) {
  std::vector<double> sq(m.rows(), 0.0);
  double top = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (double x : m.row(i)) sq[i] += x * x;
    top = std::max(top, sq[i]);
  }
  const double cut = rel_tol * rel_tol * top;
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    if (sq[i] == 0.0 || sq[i] <= cut) {
      ++zeros;
      std::fill(r.begin(), r.end(), 0.0);
      continue;
    }
    const double inv = 1.0 / std::sqrt(sq[i]);
    for (double& x : r) x *= inv;
  }
  if (zero_rows) *zero_rows = zeros;
}

}  // namespace

std::string to_string(AffinityMode a) { return a == AffinityMode::squared ? "squared" : "abs"; }

AffinityMode parse_affinity_mode(const std::string& s) {
  if (s == "squared") return AffinityMode::squared;
  if (s == "abs") return AffinityMode::abs;
  throw ParameterError("unknown affinity mode '" + s + "' (squared, abs)");
}

Matrix recover_Z(const Matrix& X, const Matrix& U, const Matrix& V) {
  if (U.rows() != X.rows() || V.cols() != X.cols() || U.cols() != V.rows())
    throw DimensionError("recover_Z: X " + shape_string(X) + ", U " + shape_string(U) + ", V " +
                         shape_string(V) + " are incompatible");
  if (U.cols() == 0) return Matrix(X.cols(), X.cols());
  const Matrix pinv = pseudoinverse(X);
  return kernels::matmul(kernels::matmul(pinv, U), V);
}

Matrix build_affinity_squared(const Matrix& Z, double rank_tol, std::vector<std::string>* warnings) {
  if (Z.rows() != Z.cols()) throw DimensionError("build_affinity_squared: Z must be square");
  if (!(rank_tol > 0.0)) throw ParameterError("build_affinity_squared: rank_tol must be > 0");
  const std::size_t n = Z.rows();
  SvdResult sv = svd(Z);
  if (sv.singulars.empty() || sv.singulars.front() == 0.0)
    throw ParameterError("build_affinity_squared: Z is zero, nothing to cluster");
  const std::size_t r = sv.numerical_rank(rank_tol);
  Matrix M(n, r);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < r; ++k) M(i, k) = sv.left(i, k) * std::sqrt(sv.singulars[k]);
  std::size_t zero_rows = 0;
  normalize_rows(M, 1e-10, &zero_rows);
  if (zero_rows > 0 && warnings)
    warnings->push_back(std::to_string(zero_rows) +
                        " samples have an all-zero embedding row; their affinities are zero");

  const Matrix G = kernels::matmul_nt(M, M);
  Matrix W(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double ni = 0.0;
    for (double x : M.row(i)) ni += x * x;
    W(i, i) = ni > 0.0 ? 1.0 : 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = std::clamp(G(i, j), -1.0, 1.0);
      W(i, j) = W(j, i) = c * c;
    }
  }
  return W;
}

Matrix build_affinity_abs(const Matrix& Z) {
  if (Z.rows() != Z.cols()) throw DimensionError("build_affinity_abs: Z must be square");
  const std::size_t n = Z.rows();
  Matrix W(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) W(i, j) = (std::abs(Z(i, j)) + std::abs(Z(j, i))) / 2.0;
  return W;
}

Labels ncut_cluster(const Matrix& W, std::size_t k, std::uint64_t seed,
                    std::vector<std::string>* warnings, const KMeansOptions& opt) {
  if (W.rows() != W.cols()) throw DimensionError("ncut_cluster: W must be square");
  const std::size_t n = W.rows();
  if (k < 2) throw ParameterError("ncut_cluster: need k >= 2 clusters");
  if (k > n) throw ParameterError("ncut_cluster: k exceeds the number of samples");
  if (!W.all_finite()) throw ParameterError("ncut_cluster: W has non-finite entries");

  std::vector<double> dinv(n, 0.0);
  std::size_t isolated = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (double x : W.row(i)) {
      if (x < 0.0) throw ParameterError("ncut_cluster: W has negative entries");
      d += x;
    }
    if (d > 0.0)
      dinv[i] = 1.0 / std::sqrt(d);
    else
      ++isolated;
  }
  if (isolated > 0 && warnings)
    warnings->push_back(std::to_string(isolated) + " isolated vertices (zero degree) in the affinity graph");

  Matrix L(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = dinv[i] * W(i, j) * dinv[j];
      L(i, j) = (i == j ? 1.0 : 0.0) - a;
    }
  // Exact symmetry so the eigensolver sees the same matrix either way round.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) L(j, i) = L(i, j);

  const EigResult eig = symmetric_eig(L);
  Matrix emb(n, k);
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t src = n - 1 - c;  // values are descending
    for (std::size_t i = 0; i < n; ++i) emb(i, c) = eig.vectors(i, src);
  }
  normalize_rows(emb, 0.0, nullptr);
  return kmeans(emb, k, seed, opt).labels;
}

Segmentation segment(const Matrix& X, const Matrix& U, const Matrix& V, std::size_t k,
                     AffinityMode mode, std::uint64_t seed, double rank_tol) {
  Segmentation out;
  out.Z = recover_Z(X, U, V);
  out.W = mode == AffinityMode::squared ? build_affinity_squared(out.Z, rank_tol, &out.warnings)
                                        : build_affinity_abs(out.Z);
  out.labels = ncut_cluster(out.W, k, seed, &out.warnings);
  return out;
}

}  // namespace gnrfm
