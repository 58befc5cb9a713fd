#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gnrfm/matrix.hpp"

namespace gnrfm {

using Labels = std::vector<int>;

enum class AffinityMode { squared, abs };

std::string to_string(AffinityMode a);
AffinityMode parse_affinity_mode(const std::string& s);

/// Z = X^+ U V  (n x n).
Matrix recover_Z(const Matrix& X, const Matrix& U, const Matrix& V);

/// Skinny SVD of Z (singulars > rank_tol * sigma_max), M = U_hat Sigma_hat^(1/2)
/// with unit rows, W = (M M^T) squared entrywise. Built symmetrically; the
/// diagonal is exactly 1 for nonzero rows. Zero rows of M stay zero and add a
/// warning. Throws ParameterError when Z = 0.
Matrix build_affinity_squared(const Matrix& Z, double rank_tol = 1e-8,
                              std::vector<std::string>* warnings = nullptr);

/// W = (|Z| + |Z^T|) / 2.
Matrix build_affinity_abs(const Matrix& Z);

struct KMeansOptions {
  std::size_t restarts = 20;
  std::size_t max_iter = 300;
};

struct KMeansResult {
  Labels labels;
  Matrix centers;
  double inertia = 0.0;
};

/// Lloyd iterations from k-means++ seeds; the restart with the smallest
/// within-cluster sum of squares wins (ties: earliest restart). Restart r
/// draws from derive_seed(seed, r).
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& opt = {});

/// Normalized spectral clustering on L_sym = I - D^(-1/2) W D^(-1/2):
/// eigenvectors of the k smallest eigenvalues, rows scaled to unit norm,
/// then kmeans. Isolated vertices get D^(-1/2) = 0 and a warning.
Labels ncut_cluster(const Matrix& W, std::size_t k, std::uint64_t seed,
                    std::vector<std::string>* warnings = nullptr, const KMeansOptions& opt = {});

struct Segmentation {
  Matrix Z;
  Matrix W;
  Labels labels;
  std::vector<std::string> warnings;
};

/// Z recovery, affinity construction and N-cut in one call.
Segmentation segment(const Matrix& X, const Matrix& U, const Matrix& V, std::size_t k,
                     AffinityMode mode, std::uint64_t seed, double rank_tol = 1e-8);

}  // namespace gnrfm
