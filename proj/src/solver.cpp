#include "gnrfm/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "gnrfm/kernels.hpp"
#include "gnrfm/linalg.hpp"

namespace gnrfm {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw ParameterError("solver config: " + field + " " + why);
}

// (U V)  + E - X, entrywise in that order.
Matrix residual_matrix(const Matrix& P, const Matrix& E, const Matrix& X) {
  Matrix r(X.rows(), X.cols());
  const double* p = P.data();
  const double* e = E.data();
  const double* x = X.data();
  double* o = r.data();
  for (std::size_t i = 0; i < r.size(); ++i) o[i] = p[i] + e[i] - x[i];
  return r;
}

Matrix shrink_target_E(const Matrix& X, const Matrix& P, const Matrix& Y, double beta) {
  Matrix r(X.rows(), X.cols());
  const double* p = P.data();
  const double* y = Y.data();
  const double* x = X.data();
  double* o = r.data();
  for (std::size_t i = 0; i < r.size(); ++i) o[i] = x[i] - p[i] - y[i] / beta;
  return r;
}

UUpdate update_U_from(const FactorState& s, const Matrix& X, const SolverConfig& cfg,
                      const Matrix& V_new, const Matrix& P_lin) {
  UUpdate out;
  out.xi = cfg.q_form == QForm::literal ? s.xi : step_constant(V_new);
  if (out.xi == 0.0) {
    out.U = s.U;
    out.skipped = true;
    return out;
  }
  // G = P + E - X + Y/beta
  Matrix G(X.rows(), X.cols());
  {
    const double* p = P_lin.data();
    const double* e = s.E.data();
    const double* x = X.data();
    const double* y = s.Y.data();
    double* g = G.data();
    for (std::size_t i = 0; i < G.size(); ++i) g[i] = p[i] + e[i] - x[i] + y[i] / s.beta;
  }
  const Matrix GVt = kernels::matmul_nt(G, V_new);
  Matrix Q(s.U.rows(), s.U.cols());
  for (std::size_t i = 0; i < Q.size(); ++i) Q.data()[i] = s.U.data()[i] - GVt.data()[i] / out.xi;
  out.tau = cfg.mu_U / (s.beta * out.xi);
  out.U = column_soft_threshold(Q, out.tau);
  return out;
}

MultiplierUpdate multiplier_from(const FactorState& s, const Matrix& R, const SolverConfig& cfg,
                                 double prev_residual_norm) {
  MultiplierUpdate out;
  out.Y = s.Y;
  double* y = out.Y.data();
  const double* r = R.data();
  for (std::size_t i = 0; i < out.Y.size(); ++i) y[i] += s.beta * r[i];
  out.residual_norm = frobenius_norm(R);
  if (s.t > 0 && out.residual_norm <= cfg.zeta * prev_residual_norm) {
    out.beta = s.beta;
  } else {
    const double grow = std::max(cfg.rho * s.beta, std::pow(frobenius_norm(out.Y), 1.0 + cfg.nu));
    out.beta = std::min(cfg.beta_max, grow);
  }
  return out;
}

bool all_columns_zero(const Matrix& U) { return zero_columns(U).size() == U.cols(); }

}  // namespace

void SolverConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(mu_U)) bad("mu_U", "must be > 0");
  if (!positive(mu_V)) bad("mu_V", "must be > 0");
  if (!positive(beta0)) bad("beta0", "must be > 0");
  if (!(beta_max >= beta0) || !std::isfinite(beta_max)) bad("beta_max", "must be >= beta0");
  if (!(rho > 1.0) || !std::isfinite(rho)) bad("rho", "must be > 1");
  if (!(zeta > 0.0 && zeta < 1.0)) bad("zeta", "must lie in (0, 1)");
  if (!(nu > 0.0 && nu < 1.0)) bad("nu", "must lie in (0, 1)");
  if (!positive(eps)) bad("eps", "must be > 0");
  if (max_outer < 1) bad("max_outer", "must be >= 1");
  if (inner_mode == InnerMode::fixed && inner_steps < 1) bad("inner_steps", "must be >= 1");
  if (inner_mode == InnerMode::converge) {
    if (!positive(eps_inner)) bad("eps_inner", "must be > 0");
    if (max_inner < 1) bad("max_inner", "must be >= 1");
  }
  if (!positive(lagrangian_cap)) bad("lagrangian_cap", "must be > 0");
}

SolverConfig SolverConfig::aalm(double mu_U, double mu_V) {
  SolverConfig c;
  c.mu_U = mu_U;
  c.mu_V = mu_V;
  return c;
}

SolverConfig SolverConfig::alm_fixed(double mu_U, double mu_V, std::size_t steps) {
  SolverConfig c = aalm(mu_U, mu_V);
  c.inner_mode = InnerMode::fixed;
  c.inner_steps = steps;
  c.prune_zero_columns = false;
  return c;
}

SolverConfig SolverConfig::alm_converge(double mu_U, double mu_V, double eps_inner) {
  SolverConfig c = aalm(mu_U, mu_V);
  c.inner_mode = InnerMode::converge;
  c.eps_inner = eps_inner;
  c.prune_zero_columns = false;
  return c;
}

std::string to_string(InnerMode m) {
  switch (m) {
    case InnerMode::one_step: return "one_step";
    case InnerMode::fixed: return "fixed";
    case InnerMode::converge: return "converge";
  }
  return "?";
}

std::string to_string(QForm q) { return q == QForm::literal ? "literal" : "consistent"; }

InnerMode parse_inner_mode(const std::string& s) {
  if (s == "one_step" || s == "one-step") return InnerMode::one_step;
  if (s == "fixed") return InnerMode::fixed;
  if (s == "converge") return InnerMode::converge;
  throw ParameterError("unknown inner mode '" + s + "' (one_step, fixed, converge)");
}

QForm parse_q_form(const std::string& s) {
  if (s == "literal") return QForm::literal;
  if (s == "consistent") return QForm::consistent;
  throw ParameterError("unknown q form '" + s + "' (literal, consistent)");
}

double step_constant(const Matrix& V) { return 1.02 * spectral_norm_sq(V); }

FactorState init_state(const Matrix& X, const SolverConfig& cfg, std::vector<std::string>* warnings) {
  if (X.empty()) throw DimensionError("init_state: empty data matrix");
  if (!X.all_finite()) throw ParameterError("init_state: data matrix has non-finite entries");
  const std::size_t m = X.rows();
  const std::size_t n = X.cols();
  const std::size_t cap = std::min(m, n);
  std::size_t K = cfg.K == 0 ? cap : cfg.K;
  if (K > cap) {
    if (warnings)
      warnings->push_back("K = " + std::to_string(K) + " exceeds min(rows, cols); clamped to " +
                          std::to_string(cap));
    K = cap;
  }
  SvdResult sv = svd(X);
  const std::size_t rank = sv.numerical_rank(1e-12 * static_cast<double>(std::max(m, n)));
  if (rank == 0) throw ParameterError("init_state: data matrix is zero");
  sv.truncate(std::min(K, rank));
  const std::size_t k0 = sv.rank();

  FactorState s;
  s.U = sv.left;
  s.V = Matrix(k0, n);
  for (std::size_t k = 0; k < k0; ++k)
    for (std::size_t j = 0; j < n; ++j) s.V(k, j) = sv.singulars[k] * sv.right(j, k);
  s.E = Matrix(m, n);
  s.Y = Matrix(m, n);
  s.beta = cfg.beta0;
  s.t = 0;
  s.xi = step_constant(s.V);
  return s;
}

Matrix update_V(const FactorState& s, const Matrix& X, const SolverConfig& cfg) {
  const std::size_t k = s.U.cols();
  if (k == 0) throw DimensionError("update_V: factor has no columns");
  const Matrix UtU = kernels::matmul_tn(s.U, s.U);
  Matrix A(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) A(i, j) = s.beta * UtU(i, j) + (i == j ? cfg.mu_V : 0.0);
  Matrix R(X.rows(), X.cols());
  {
    const double* x = X.data();
    const double* e = s.E.data();
    const double* y = s.Y.data();
    double* r = R.data();
    for (std::size_t i = 0; i < R.size(); ++i) r[i] = x[i] - e[i] - y[i] / s.beta;
  }
  Matrix B = kernels::matmul_tn(s.U, R);
  B *= s.beta;
  return solve_spd(A, B);
}

UUpdate update_U(const FactorState& s, const Matrix& X, const SolverConfig& cfg, const Matrix& V_new) {
  const Matrix P = kernels::matmul(s.U, cfg.q_form == QForm::literal ? s.V : V_new);
  return update_U_from(s, X, cfg, V_new, P);
}

Matrix update_E(const FactorState& s, const Matrix& X, const Matrix& U_new, const Matrix& V_new) {
  const Matrix P = kernels::matmul(U_new, V_new);
  return column_soft_threshold(shrink_target_E(X, P, s.Y, s.beta), 1.0 / s.beta);
}

MultiplierUpdate update_multiplier_penalty(const FactorState& s, const Matrix& X,
                                           const SolverConfig& cfg, double prev_residual_norm) {
  const Matrix P = kernels::matmul(s.U, s.V);
  return multiplier_from(s, residual_matrix(P, s.E, X), cfg, prev_residual_norm);
}

std::vector<std::size_t> zero_columns(const Matrix& U) {
  std::vector<std::size_t> out;
  const std::vector<double> sq = kernels::column_sq_norms(U);
  for (std::size_t j = 0; j < sq.size(); ++j)
    if (sq[j] == 0.0) out.push_back(j);
  return out;
}

FactorState prune_zero_columns(const FactorState& s) {
  const std::vector<std::size_t> dead = zero_columns(s.U);
  if (dead.empty()) return s;
  if (dead.size() == s.U.cols())
    throw DegenerateStateError("prune_zero_columns: all " + std::to_string(s.U.cols()) +
                               " columns of U are zero");
  std::vector<std::size_t> keep;
  keep.reserve(s.U.cols() - dead.size());
  for (std::size_t j = 0, d = 0; j < s.U.cols(); ++j) {
    if (d < dead.size() && dead[d] == j) {
      ++d;
      continue;
    }
    keep.push_back(j);
  }
  FactorState out;
  out.U = Matrix(s.U.rows(), keep.size());
  out.V = Matrix(keep.size(), s.V.cols());
  for (std::size_t i = 0; i < s.U.rows(); ++i)
    for (std::size_t c = 0; c < keep.size(); ++c) out.U(i, c) = s.U(i, keep[c]);
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const auto src = s.V.row(keep[c]);
    std::copy(src.begin(), src.end(), out.V.row(c).begin());
  }
  out.E = s.E;
  out.Y = s.Y;
  out.beta = s.beta;
  out.t = s.t;
  out.xi = s.xi;
  return out;
}

double relative_residual(const Matrix& X, const Matrix& U, const Matrix& V, const Matrix& E) {
  const double nx = frobenius_norm(X);
  if (nx == 0.0) throw ParameterError("relative_residual: X is zero");
  if (U.cols() == 0) {
    Matrix r = E - X;
    return frobenius_norm(r) / nx;
  }
  return frobenius_norm(residual_matrix(kernels::matmul(U, V), E, X)) / nx;
}

double objective_value(const Matrix& U, const Matrix& V, const Matrix& E, const SolverConfig& cfg) {
  return group_norm_21(E) + cfg.mu_U * group_norm_21(U) + 0.5 * cfg.mu_V * frobenius_norm_sq(V);
}

SolveReport solve(const Matrix& X, const SolverConfig& cfg, const SolveObserver* observer) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();

  SolveReport rep;
  FactorState s = init_state(X, cfg, &rep.warnings);
  const double nx = frobenius_norm(X);
  Matrix P = kernels::matmul(s.U, s.V);
  double prev_residual_norm = 0.0;

  for (std::size_t t = 0; t < cfg.max_outer; ++t) {
    s.t = t;
    const double beta_used = s.beta;
    std::size_t inner = 0;
    bool degenerate = false;

    // (V, U) sub-iterations.
    const std::size_t cap = cfg.inner_mode == InnerMode::one_step ? 1
                            : cfg.inner_mode == InnerMode::fixed  ? cfg.inner_steps
                                                                  : cfg.max_inner;
    for (std::size_t l = 0; l < cap; ++l) {
      Matrix V_new = update_V(s, X, cfg);
      const Matrix P_lin = cfg.q_form == QForm::literal ? P : kernels::matmul(s.U, V_new);
      UUpdate U_new = update_U_from(s, X, cfg, V_new, P_lin);
      if (observer && observer->on_uv_step) observer->on_uv_step(UVStep{t, l, s, V_new, U_new});
      ++inner;
      const double xi_new = cfg.q_form == QForm::consistent && !U_new.skipped
                                ? U_new.xi
                                : step_constant(V_new);
      Matrix P_new = kernels::matmul(U_new.U, V_new);
      const double norm_old = frobenius_norm(P);
      const double norm_new = frobenius_norm(P_new);
      s.U = std::move(U_new.U);
      s.V = std::move(V_new);
      s.xi = xi_new;
      P = std::move(P_new);
      if (all_columns_zero(s.U)) {
        degenerate = true;
        break;
      }
      if (cfg.prune_zero_columns) s = prune_zero_columns(s);
      if (cfg.inner_mode == InnerMode::converge) {
        const double change = norm_old == 0.0 ? (norm_new == 0.0 ? 0.0 : 1.0)
                                              : std::abs(norm_new / norm_old - 1.0);
        if (change < cfg.eps_inner) break;
      }
    }
    if (degenerate) {
      s.U = Matrix(X.rows(), 0);
      s.V = Matrix(0, X.cols());
      rep.degenerate = true;
      rep.warnings.push_back("all factor columns shrank to zero at iteration " + std::to_string(t) +
                             "; mu_U is likely too large");
      break;
    }

    Matrix E_new = column_soft_threshold(shrink_target_E(X, P, s.Y, s.beta), 1.0 / s.beta);
    if (observer && observer->on_e_step) observer->on_e_step(EStep{t, s, E_new});
    s.E = std::move(E_new);

    const Matrix R = residual_matrix(P, s.E, X);
    MultiplierUpdate mp = multiplier_from(s, R, cfg, prev_residual_norm);
    const double obj = objective_value(s.U, s.V, s.E, cfg);
    double yr = 0.0;
    for (std::size_t i = 0; i < R.size(); ++i) yr += s.Y.data()[i] * R.data()[i];
    const double lag = obj + yr + 0.5 * s.beta * mp.residual_norm * mp.residual_norm;
    if (!std::isfinite(lag) || std::abs(lag) >= cfg.lagrangian_cap || !mp.Y.all_finite() ||
        !s.U.all_finite() || !s.V.all_finite() || !s.E.all_finite()) {
      std::ostringstream msg;
      msg << "solve: non-finite or unbounded iterate at outer iteration " << t
          << " (augmented Lagrangian " << lag << ", beta " << s.beta << ")";
      throw NumericalError(msg.str());
    }
    s.Y = std::move(mp.Y);
    s.beta = mp.beta;
    prev_residual_norm = mp.residual_norm;

    const double rel = mp.residual_norm / nx;
    rep.residual_history.push_back(rel);
    rep.rank_history.push_back(s.U.cols() - zero_columns(s.U).size());
    rep.objective_history.push_back(obj);
    rep.beta_history.push_back(beta_used);
    rep.inner_history.push_back(inner);
    rep.time_history.push_back(std::chrono::duration<double>(clock::now() - t_start).count());
    rep.iterations = t + 1;
    s.t = t + 1;
    if (observer && observer->on_iteration) observer->on_iteration(s, rep);
    if (rel < cfg.eps) {
      rep.converged = true;
      break;
    }
  }

  rep.final = std::move(s);
  rep.wall_time = std::chrono::duration<double>(clock::now() - t_start).count();
  return rep;
}

}  // namespace gnrfm
