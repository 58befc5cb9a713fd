// Acceptance checks. Usage: acceptance [criterion ...]; no argument runs all.
// Prints one PASS/FAIL line per criterion; exit status is the number of FAILs.

#include <algorithm>
#include <chrono>
#include <array>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "gnrfm/kernels.hpp"
#include "gnrfm/linalg.hpp"
#include "gnrfm/metrics.hpp"
#include "gnrfm/rng.hpp"
#include "gnrfm/segmentation.hpp"
#include "gnrfm/solver.hpp"
#include "gnrfm/synthetic.hpp"

using namespace gnrfm;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

SyntheticSpec instance(std::size_t s, std::size_t p, std::size_t d, std::size_t r, double sigma,
                       std::uint64_t seed) {
  SyntheticSpec spec;
  spec.s = s;
  spec.p = p;
  spec.d_tilde = d;
  spec.r_tilde = r;
  spec.sigma = sigma;
  spec.seed = seed;
  return spec;
}

struct Trial {
  double acc = 0.0, nmi = 0.0, seconds = 0.0;
  std::size_t iterations = 0, rank = 0;
  bool converged = false;
};

Trial pipeline(const SyntheticSpec& spec, const SolverConfig& cfg) {
  const SyntheticInstance inst = generate(spec);
  const auto t0 = std::chrono::steady_clock::now();
  const SolveReport rep = solve(inst.X, cfg);
  const Segmentation seg = segment(inst.X, rep.final.U, rep.final.V, spec.s, AffinityMode::squared, spec.seed);
  Trial t;
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  t.acc = 100.0 * accuracy(seg.labels, inst.labels);
  t.nmi = nmi(seg.labels, inst.labels);
  t.iterations = rep.iterations;
  t.rank = rep.rank_history.empty() ? rep.final.K_t() : rep.rank_history.back();
  t.converged = rep.converged;
  return t;
}

struct Cell {
  double acc = 0.0, nmi = 0.0, seconds = 0.0;
  std::size_t max_iter = 0;
  std::vector<std::size_t> ranks;
};

// Three seeded trials, seeds 1..3.
Cell cell(std::size_t s, std::size_t p, std::size_t d, std::size_t r, double sigma, double mu_U, double mu_V) {
  Cell c;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Trial t = pipeline(instance(s, p, d, r, sigma, seed), SolverConfig::aalm(mu_U, mu_V));
    c.acc += t.acc / 3;
    c.nmi += t.nmi / 3;
    c.seconds += t.seconds / 3;
    c.max_iter = std::max(c.max_iter, t.iterations);
    c.ranks.push_back(t.rank);
  }
  return c;
}

const std::vector<std::array<std::size_t, 4>> kSmallRows{{10, 20, 200, 5}, {15, 20, 200, 5}};
const std::vector<std::pair<double, double>> kHyper{{1, 10}, {1, 20}, {1, 50}};

std::map<std::string, Cell>& criterion1_cells() {
  static std::map<std::string, Cell> cells;
  if (cells.empty())
    for (const auto& row : kSmallRows)
      for (const auto& [mu_U, mu_V] : kHyper)
        cells[fmt("(%zu,%zu,%zu,%zu) mu=(%g,%g)", row[0], row[1], row[2], row[3], mu_U, mu_V)] =
            cell(row[0], row[1], row[2], row[3], 0.05, mu_U, mu_V);
  return cells;
}

Verdict criterion1() {
  Verdict v{true, ""};
  for (const auto& [name, c] : criterion1_cells()) {
    const bool ok = c.acc >= 98.0 && c.nmi >= 0.97 && c.max_iter <= 15;
    v.pass &= ok;
    v.detail += fmt("%s acc %.2f nmi %.4f it<=%zu %.2fs%s; ", name.c_str(), c.acc, c.nmi, c.max_iter, c.seconds,
                    ok ? "" : " [miss]");
  }
  return v;
}

Verdict criterion2() {
  const Cell c = cell(10, 20, 200, 5, 0.1, 1, 20);
  return {c.acc >= 97.0 && c.max_iter <= 15,
          fmt("sigma 0.1 (10,20,200,5) mu=(1,20): acc %.2f (>=97) nmi %.4f it<=%zu (<=15)", c.acc, c.nmi, c.max_iter)};
}

Verdict criterion3() {
  const Cell c = cell(10, 20, 200, 5, 0.2, 1, 50);
  return {c.acc >= 90.0 && c.nmi >= 0.85,
          fmt("sigma 0.2 (10,20,200,5) mu=(1,50): acc %.2f (>=90) nmi %.4f (>=0.85) it<=%zu", c.acc, c.nmi,
              c.max_iter)};
}

Verdict criterion4() {
  const SyntheticInstance inst = generate(instance(20, 25, 500, 5, 0.05, 1));
  const SolveReport rep = solve(inst.X, SolverConfig::aalm(1, 50));
  const double res = rep.residual_history.back();
  return {rep.converged && res < 1e-5 && rep.iterations <= 15,
          fmt("(20,25,500,5) sigma 0.05 mu=(1,50): %zu iterations (<=15), residual %.3g (<1e-5)", rep.iterations,
              res)};
}

Verdict criterion5() {
  Verdict v{true, ""};
  for (const auto& [name, c] : criterion1_cells()) {
    const std::size_t target = name.rfind("(10", 0) == 0 ? 50 : 75;
    std::string ks;
    for (std::size_t k : c.ranks) {
      const bool ok = k + 5 >= target && k <= target + 5;
      v.pass &= ok;
      ks += fmt("%zu ", k);
    }
    v.detail += fmt("%s K_t %s(target %zu+-5); ", name.c_str(), ks.c_str(), target);
  }
  return v;
}

// Zero columns persist without pruning; pruning does not change the run.
Verdict criterion6() {
  std::size_t runs_ok = 0, runs_with_zero = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const SyntheticSpec spec = instance(3 + seed % 2, 8 + seed % 3, 30 + 2 * (seed % 6), 3, 0.05, seed);
    const SyntheticInstance inst = generate(spec);
    SolverConfig off = SolverConfig::aalm(2.0 + static_cast<double>(seed % 4), 10.0);
    off.prune_zero_columns = false;
    std::vector<bool> dead;
    bool persistent = true;
    SolveObserver obs;
    obs.on_uv_step = [&](const UVStep& st) {
      const Matrix& U = st.U_new.U;
      if (dead.empty()) dead.assign(U.cols(), false);
      for (std::size_t c = 0; c < dead.size(); ++c)
        if (dead[c])
          for (std::size_t i = 0; i < U.rows(); ++i) persistent &= U(i, c) == 0.0;
      for (std::size_t c : zero_columns(U)) dead[c] = true;
    };
    const SolveReport a = solve(inst.X, off, &obs);
    SolverConfig on = off;
    on.prune_zero_columns = true;
    const SolveReport b = solve(inst.X, on);
    bool same = a.residual_history.size() == b.residual_history.size();
    for (std::size_t i = 0; same && i < a.residual_history.size(); ++i) {
      const double diff = std::abs(a.residual_history[i] - b.residual_history[i]);
      worst = std::max(worst, diff);
      same &= diff <= 1e-12;
    }
    runs_ok += persistent && same;
    runs_with_zero += std::count(dead.begin(), dead.end(), true) > 0;
  }
  return {runs_ok == 50 && runs_with_zero > 0,
          fmt("%zu/50 runs pass (persistence and prune equivalence), %zu runs had zero columns, max history diff %.3g",
              runs_ok, runs_with_zero, worst)};
}

// Column shrinkage recomputed with the serial kernels and a separate loop.
Matrix shrink_columns(const Matrix& m, double tau) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double sq = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) sq += m(i, j) * m(i, j);
    const double norm = std::sqrt(sq);
    if (!(norm > tau)) continue;
    const double scale = (norm - tau) / norm;
    for (std::size_t i = 0; i < m.rows(); ++i) out(i, j) = m(i, j) * scale;
  }
  return out;
}

Verdict criterion7() {
  const SyntheticInstance inst = generate(instance(10, 20, 200, 5, 0.05, 1));
  const Matrix& X = inst.X;
  const SolverConfig cfg = SolverConfig::aalm(1, 50);
  const double bound = 1e-8 * (1 + frobenius_norm(X));
  double worst_v = 0.0;
  std::size_t steps = 0, u_bad = 0, e_bad = 0, e_steps = 0;
  SolveObserver obs;
  obs.on_uv_step = [&](const UVStep& st) {
    const FactorState& s = st.before;
    const std::size_t k = s.U.cols();
    Matrix A = kernels::serial::matmul_tn(s.U, s.U) * s.beta;
    for (std::size_t i = 0; i < k; ++i) A(i, i) += cfg.mu_V;
    Matrix T(X.rows(), X.cols());
    for (std::size_t i = 0; i < T.size(); ++i) T.data()[i] = X.data()[i] - s.E.data()[i] - s.Y.data()[i] / s.beta;
    const Matrix rhs = kernels::serial::matmul_tn(s.U, T) * s.beta;
    worst_v = std::max(worst_v, frobenius_norm(kernels::serial::matmul(A, st.V_new) - rhs));

    const Matrix P = kernels::serial::matmul(s.U, s.V);
    Matrix G(X.rows(), X.cols());
    for (std::size_t i = 0; i < G.size(); ++i)
      G.data()[i] = P.data()[i] + s.E.data()[i] - X.data()[i] + s.Y.data()[i] / s.beta;
    const double xi = 1.02 * spectral_norm_sq(s.V);
    const Matrix GVt = kernels::serial::matmul_nt(G, st.V_new);
    Matrix Q(s.U.rows(), k);
    for (std::size_t i = 0; i < Q.size(); ++i) Q.data()[i] = s.U.data()[i] - GVt.data()[i] / st.U_new.xi;
    const double tau = cfg.mu_U / (s.beta * st.U_new.xi);
    const bool xi_ok = std::abs(st.U_new.xi - xi) <= 1e-12 * xi;
    u_bad += !(xi_ok && tau == st.U_new.tau && shrink_columns(Q, tau) == st.U_new.U);
    ++steps;
  };
  obs.on_e_step = [&](const EStep& st) {
    const FactorState& s = st.before;
    const Matrix P = kernels::serial::matmul(s.U, s.V);
    Matrix T(X.rows(), X.cols());
    for (std::size_t i = 0; i < T.size(); ++i) T.data()[i] = X.data()[i] - P.data()[i] - s.Y.data()[i] / s.beta;
    e_bad += !(shrink_columns(T, 1.0 / s.beta) == st.E_new);
    ++e_steps;
  };
  const SolveReport rep = solve(X, cfg, &obs);
  return {steps == rep.iterations && e_steps == rep.iterations && worst_v <= bound && u_bad == 0 && e_bad == 0,
          fmt("%zu iterations monitored: max V normal-eq residual %.3g (bound %.3g), U mismatches %zu, E mismatches "
              "%zu",
              steps, worst_v, bound, u_bad, e_bad)};
}

Verdict criterion8() {
  const SyntheticInstance inst = generate(instance(20, 25, 500, 5, 0.05, 1));
  const double e0 = frobenius_norm(inst.E0);
  struct Run {
    double seconds, e_err, residual;
    bool converged;
  };
  auto run = [&](const SolverConfig& cfg) {
    const SolveReport rep = solve(inst.X, cfg);
    return Run{rep.wall_time, frobenius_norm(rep.final.E - inst.E0) / e0, rep.residual_history.back(),
               rep.converged};
  };
  const Run aalm = run(SolverConfig::aalm(1, 50));
  const Run fixed = run(SolverConfig::alm_fixed(1, 50, 5));
  const Run conv = run(SolverConfig::alm_converge(1, 50, 1e-4));
  const bool faster = aalm.converged && aalm.seconds < conv.seconds;
  const bool recovery = aalm.e_err <= fixed.e_err + 0.05;
  return {faster && recovery,
          fmt("(a) time AALM %.2fs vs ALM-converge %.2fs (res %.2g/%.2g): %s; (b) E rel err AALM %.4f vs fixed(5) "
              "%.4f + 0.05: %s",
              aalm.seconds, conv.seconds, aalm.residual, conv.residual, faster ? "ok" : "miss", aalm.e_err,
              fixed.e_err, recovery ? "ok" : "miss")};
}

Verdict criterion9() {
  const std::size_t m = 200, K = 60;
  std::vector<double> med;
  for (std::size_t n : {200u, 400u, 800u}) {
    Rng rng(derive_seed(9, n));
    Matrix A(m, K), B(K, n), X(m, n);
    for (double& a : A.values()) a = rng.normal();
    for (double& b : B.values()) b = rng.normal();
    X = kernels::matmul(A, B);
    for (double& x : X.values()) x += 0.1 * rng.normal();
    SolverConfig cfg = SolverConfig::aalm(1e-3, 1.0);
    cfg.K = K;
    cfg.prune_zero_columns = false;
    cfg.eps = 1e-300;
    cfg.max_outer = 25;
    const SolveReport rep = solve(X, cfg);
    std::vector<double> dt;
    for (std::size_t i = 1; i < rep.time_history.size(); ++i)
      dt.push_back(rep.time_history[i] - rep.time_history[i - 1]);
    std::nth_element(dt.begin(), dt.begin() + dt.size() / 2, dt.end());
    med.push_back(dt[dt.size() / 2]);
  }
  const double r1 = med[1] / med[0], r2 = med[2] / med[1];
  return {r1 <= 2.8 && r2 <= 2.8,
          fmt("median s/iter n=200 %.4g, 400 %.4g, 800 %.4g; ratios %.2f %.2f (<=2.8)", med[0], med[1], med[2], r1,
              r2)};
}

double brute_accuracy(const Labels& pred, const Labels& truth) {
  const ContingencyTable t = contingency(pred, truth);
  const std::size_t kp = t.counts.size(), kt = t.counts.front().size(), k = std::max(kp, kt);
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::size_t best = 0;
  do {
    std::size_t hit = 0;
    for (std::size_t a = 0; a < kp; ++a)
      if (perm[a] < kt) hit += t.counts[a][perm[a]];
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(t.n);
}

Verdict criterion10() {
  Rng rng(10);
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = 1 + rng.below(60), ka = 1 + rng.below(6), kb = 1 + rng.below(6);
    Labels a(n), b(n);
    for (int& x : a) x = static_cast<int>(rng.below(ka));
    for (int& x : b) x = static_cast<int>(rng.below(kb));
    mismatches += std::abs(accuracy(a, b) - brute_accuracy(a, b)) > 1e-15;
  }
  Labels p, q;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      p.push_back(i);
      q.push_back(j);
    }
  const double same = nmi(p, p), indep = nmi(p, q);
  return {mismatches == 0 && std::abs(same - 1.0) <= 1e-12 && std::abs(indep) <= 1e-12,
          fmt("Hungarian vs brute force mismatches %zu/500; NMI identical %.15f, independent balanced %.3g", mismatches,
              same, indep)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  std::vector<std::size_t> which;
  for (int i = 1; i < argc; ++i) {
    const long c = std::strtol(argv[i], nullptr, 10);
    if (c < 1 || c > static_cast<long>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
      return 2;
    }
    which.push_back(static_cast<std::size_t>(c));
  }
  if (which.empty())
    for (std::size_t c = 1; c <= criteria.size(); ++c) which.push_back(c);
  int failed = 0;
  for (std::size_t c : which) {
    Verdict v;
    try {
      v = criteria[c - 1]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s criterion %zu: %s\n", v.pass ? "PASS" : "FAIL", c, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
