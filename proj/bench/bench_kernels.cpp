// Serial reference vs OpenMP kernels, plus one full solver iteration.

#include <benchmark/benchmark.h>

#include "gnrfm/kernels.hpp"
#include "gnrfm/rng.hpp"
#include "gnrfm/solver.hpp"

namespace {

using gnrfm::Matrix;

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  gnrfm::Rng rng(seed);
  Matrix m(r, c);
  for (double& x : m.values()) x = rng.normal();
  return m;
}

// m x n times n x 60, the shape of the U-step product.
void BM_matmul(benchmark::State& s) {
  const auto m = static_cast<std::size_t>(s.range(0)), n = static_cast<std::size_t>(s.range(1));
  const Matrix a = random_matrix(m, n, 1), b = random_matrix(n, 60, 2);
  for (auto _ : s) benchmark::DoNotOptimize(gnrfm::kernels::matmul(a, b));
}
void BM_matmul_serial(benchmark::State& s) {
  const auto m = static_cast<std::size_t>(s.range(0)), n = static_cast<std::size_t>(s.range(1));
  const Matrix a = random_matrix(m, n, 1), b = random_matrix(n, 60, 2);
  for (auto _ : s) benchmark::DoNotOptimize(gnrfm::kernels::serial::matmul(a, b));
}
// (m x 60)^T times (m x n)
void BM_matmul_tn(benchmark::State& s) {
  const auto m = static_cast<std::size_t>(s.range(0)), n = static_cast<std::size_t>(s.range(1));
  const Matrix a = random_matrix(m, 60, 1), b = random_matrix(m, n, 2);
  for (auto _ : s) benchmark::DoNotOptimize(gnrfm::kernels::matmul_tn(a, b));
}
void BM_matmul_tn_serial(benchmark::State& s) {
  const auto m = static_cast<std::size_t>(s.range(0)), n = static_cast<std::size_t>(s.range(1));
  const Matrix a = random_matrix(m, 60, 1), b = random_matrix(m, n, 2);
  for (auto _ : s) benchmark::DoNotOptimize(gnrfm::kernels::serial::matmul_tn(a, b));
}
// (m x n) times (60 x n)^T
void BM_matmul_nt(benchmark::State& s) {
  const auto m = static_cast<std::size_t>(s.range(0)), n = static_cast<std::size_t>(s.range(1));
  const Matrix a = random_matrix(m, n, 1), b = random_matrix(60, n, 2);
  for (auto _ : s) benchmark::DoNotOptimize(gnrfm::kernels::matmul_nt(a, b));
}
void BM_matmul_nt_serial(benchmark::State& s) {
  const auto m = static_cast<std::size_t>(s.range(0)), n = static_cast<std::size_t>(s.range(1));
  const Matrix a = random_matrix(m, n, 1), b = random_matrix(60, n, 2);
  for (auto _ : s) benchmark::DoNotOptimize(gnrfm::kernels::serial::matmul_nt(a, b));
}

// Ten AALM iterations on an m x n problem with K = 60.
void BM_solve_10(benchmark::State& s) {
  const auto m = static_cast<std::size_t>(s.range(0)), n = static_cast<std::size_t>(s.range(1));
  const Matrix X = gnrfm::kernels::matmul(random_matrix(m, 60, 3), random_matrix(60, n, 4));
  gnrfm::SolverConfig cfg = gnrfm::SolverConfig::aalm(1e-3, 1.0);
  cfg.K = 60;
  cfg.eps = 1e-300;
  cfg.max_outer = 10;
  cfg.prune_zero_columns = false;
  for (auto _ : s) benchmark::DoNotOptimize(gnrfm::solve(X, cfg));
}

#define SIZES ->Args({200, 200})->Args({200, 400})->Args({200, 800})->Unit(benchmark::kMillisecond)
BENCHMARK(BM_matmul) SIZES;
BENCHMARK(BM_matmul_serial) SIZES;
BENCHMARK(BM_matmul_tn) SIZES;
BENCHMARK(BM_matmul_tn_serial) SIZES;
BENCHMARK(BM_matmul_nt) SIZES;
BENCHMARK(BM_matmul_nt_serial) SIZES;
BENCHMARK(BM_solve_10) SIZES;

}  // namespace

BENCHMARK_MAIN();
