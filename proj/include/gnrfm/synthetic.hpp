#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gnrfm/matrix.hpp"
#include "gnrfm/segmentation.hpp"

namespace gnrfm {

struct SyntheticSpec {
  std::size_t s = 10;        // subspaces
  std::size_t p = 20;        // samples per subspace
  std::size_t d_tilde = 200;  // ambient dimension
  std::size_t r_tilde = 5;   // subspace dimension
  double sigma = 0.05;
  double contamination = 0.2;  // fraction of columns that receive noise
  std::uint64_t seed = 1;
  bool fresh_rotation = false;  // draw a new T for every B_{i+1} = T B_i

  std::size_t samples() const noexcept { return s * p; }
  /// round-half-up(contamination * s * p)
  std::size_t contaminated_count() const;
  void validate() const;

  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

struct SyntheticInstance {
  Matrix X;   // d_tilde x (s p)
  Labels labels;
  Matrix E0;  // injected noise, zero outside contaminated columns
  std::vector<std::size_t> contaminated;  // ascending column indices
};

/// d x d orthogonal matrix with determinant +1.
Matrix random_rotation(std::size_t d, std::uint64_t seed);

/// Union of s independent r-dimensional subspaces: B_1 from a random
/// orthogonal matrix, B_{i+1} = T B_i, X_i = B_i P_i with P_i ~ N(0, 1).
/// Contaminated columns get x += sigma ||x|| eta, eta ~ N(0, I).
SyntheticInstance generate(const SyntheticSpec& spec);

}  // namespace gnrfm
