#include "gnrfm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gnrfm/kernels.hpp"
#include "gnrfm/linalg.hpp"
#include "gnrfm/rng.hpp"

namespace gnrfm {

namespace {

enum Stream : std::uint64_t { kBasis = 0, kData = 1, kPick = 2, kNoise = 3, kRotation = 16 };

Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix g(rows, cols);
  for (double& x : g.values()) x = rng.normal();
  return g;
}

}  // namespace

std::size_t SyntheticSpec::contaminated_count() const {
  return static_cast<std::size_t>(std::floor(contamination * static_cast<double>(samples()) + 0.5));
}

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& what) { throw ParameterError("synthetic spec: " + what); };
  if (s < 1) fail("s must be >= 1");
  if (p < 1) fail("p must be >= 1");
  if (r_tilde < 1) fail("r_tilde must be >= 1");
  if (r_tilde > d_tilde) fail("r_tilde must not exceed d_tilde");
  if (s * r_tilde > d_tilde) fail("s * r_tilde must not exceed d_tilde (subspaces must be independent)");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail("sigma must be finite and >= 0");
  if (!(contamination >= 0.0 && contamination <= 1.0)) fail("contamination must lie in [0, 1]");
}

Matrix random_rotation(std::size_t d, std::uint64_t seed) {
  if (d < 1) throw ParameterError("random_rotation: d must be >= 1");
  Rng rng(seed);
  int det = 1;
  Matrix q = orthonormal_q(gaussian(d, d, rng), &det);
  if (det < 0)
    for (std::size_t i = 0; i < d; ++i) q(i, d - 1) = -q(i, d - 1);
  return q;
}

SyntheticInstance generate(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t d = spec.d_tilde;
  const std::size_t r = spec.r_tilde;
  const std::size_t n = spec.samples();

  Rng basis_rng(derive_seed(spec.seed, kBasis));
  Matrix B = orthonormal_q(gaussian(d, d, basis_rng)).leading_cols(r);
  Matrix T;
  if (!spec.fresh_rotation && spec.s > 1) T = random_rotation(d, derive_seed(spec.seed, kRotation));

  SyntheticInstance inst;
  inst.X = Matrix(d, n);
  inst.E0 = Matrix(d, n);
  inst.labels.resize(n);
  Rng data_rng(derive_seed(spec.seed, kData));
  for (std::size_t i = 0; i < spec.s; ++i) {
    if (i > 0) {
      const Matrix Ti =
          spec.fresh_rotation ? random_rotation(d, derive_seed(spec.seed, kRotation + i)) : T;
      B = kernels::matmul(Ti, B);
    }
    const Matrix P = gaussian(r, spec.p, data_rng);
    const Matrix Xi = kernels::matmul(B, P);
    for (std::size_t c = 0; c < spec.p; ++c) {
      const std::size_t j = i * spec.p + c;
      inst.labels[j] = static_cast<int>(i);
      for (std::size_t row = 0; row < d; ++row) inst.X(row, j) = Xi(row, c);
    }
  }

  // Partial Fisher-Yates: the first `count` slots form a uniform sample.
  const std::size_t count = std::min(spec.contaminated_count(), n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng pick_rng(derive_seed(spec.seed, kPick));
  for (std::size_t a = 0; a < count; ++a) std::swap(idx[a], idx[a + pick_rng.below(n - a)]);
  inst.contaminated.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(inst.contaminated.begin(), inst.contaminated.end());

  Rng noise_rng(derive_seed(spec.seed, kNoise));
  for (std::size_t j : inst.contaminated) {
    double norm = 0.0;
    for (std::size_t row = 0; row < d; ++row) norm += inst.X(row, j) * inst.X(row, j);
    norm = std::sqrt(norm);
    for (std::size_t row = 0; row < d; ++row) {
      const double eta = noise_rng.normal();
      if (spec.sigma == 0.0) continue;
      const double e = spec.sigma * norm * eta;
      inst.E0(row, j) = e;
      inst.X(row, j) += e;
    }
  }
  return inst;
}

}  // namespace gnrfm
