#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gnrfm/matrix.hpp"

namespace gnrfm {

enum class InnerMode { one_step, fixed, converge };

/// How the linearisation point Q of the U step is assembled.
///   literal:    Q = U_t - (U_t V_t + E_t - X + Y_t/beta) V_{t+1}^T / xi(V_t)
///   consistent: Q = U_t - (U_t V_{t+1} + E_t - X + Y_t/beta) V_{t+1}^T / xi(V_{t+1})
/// with xi(V) = 1.02 * sigma_max(V)^2.
enum class QForm { literal, consistent };

struct SolverConfig {
  double mu_U = 1.0;
  double mu_V = 10.0;
  std::size_t K = 0;  // 0 selects min(rows, cols)
  double beta0 = 1.0;
  double beta_max = 1e5;
  double rho = 2.0;
  double zeta = 0.9;
  double nu = 0.1;
  double eps = 1e-5;
  std::size_t max_outer = 200;
  InnerMode inner_mode = InnerMode::one_step;
  std::size_t inner_steps = 5;  // L for InnerMode::fixed
  double eps_inner = 1e-4;      // InnerMode::converge tolerance
  std::size_t max_inner = 500;  // InnerMode::converge safety cap
  bool prune_zero_columns = true;
  QForm q_form = QForm::literal;
  double lagrangian_cap = 1e30;

  /// Throws ParameterError naming the first offending field.
  void validate() const;

  /// Accelerated variant: one inner step, zero-column pruning.
  static SolverConfig aalm(double mu_U, double mu_V);
  /// ALM with a fixed number of inner steps, no pruning.
  static SolverConfig alm_fixed(double mu_U, double mu_V, std::size_t steps);
  /// ALM with inner steps run until ||UV||_F stagnates, no pruning.
  static SolverConfig alm_converge(double mu_U, double mu_V, double eps_inner);
};

std::string to_string(InnerMode m);
std::string to_string(QForm q);
InnerMode parse_inner_mode(const std::string& s);
QForm parse_q_form(const std::string& s);

struct FactorState {
  Matrix U;  // m x K_t
  Matrix V;  // K_t x n
  Matrix E;  // m x n
  Matrix Y;  // m x n multiplier
  double beta = 1.0;
  std::size_t t = 0;
  /// xi(V) for the current V, computed before any pruning of V's rows.
  double xi = 0.0;

  std::size_t K_t() const noexcept { return U.cols(); }
};

/// xi(V) = 1.02 * sigma_max(V)^2.
double step_constant(const Matrix& V);

/// Skinny-SVD start: U0 = left singular vectors, V0 = diag(s) * right^T,
/// keeping min(K, numerical rank of X) triplets. E0 = Y0 = 0.
/// Warnings (K clamping) are appended to `warnings` when given.
FactorState init_state(const Matrix& X, const SolverConfig& cfg,
                       std::vector<std::string>* warnings = nullptr);

/// V = (mu_V I + beta U^T U)^{-1} beta U^T (X - E - Y/beta).
Matrix update_V(const FactorState& s, const Matrix& X, const SolverConfig& cfg);

struct UUpdate {
  Matrix U;
  double xi = 0.0;   // step constant used
  double tau = 0.0;  // column threshold mu_U / (beta xi)
  bool skipped = false;  // xi == 0: U left unchanged
};

/// Linearised proximal step on U followed by column soft-thresholding.
UUpdate update_U(const FactorState& s, const Matrix& X, const SolverConfig& cfg,
                 const Matrix& V_new);

/// Column shrinkage of X - UV - Y/beta with threshold 1/beta.
Matrix update_E(const FactorState& s, const Matrix& X, const Matrix& U_new, const Matrix& V_new);

struct MultiplierUpdate {
  Matrix Y;
  double beta = 0.0;
  double residual_norm = 0.0;  // ||UV + E - X||_F
};

/// Y += beta (UV + E - X); beta is kept when t > 0 and the residual dropped
/// below zeta * prev_residual_norm, otherwise grown to
/// min(beta_max, max(rho beta, ||Y_new||_F^(1+nu))).
MultiplierUpdate update_multiplier_penalty(const FactorState& s, const Matrix& X,
                                           const SolverConfig& cfg, double prev_residual_norm);

/// Degenerate state: every factor column has been shrunk to zero.
class DegenerateStateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Indices of columns of U whose norm is exactly zero.
std::vector<std::size_t> zero_columns(const Matrix& U);

/// Removes exactly-zero columns of U and the same rows of V.
/// Throws DegenerateStateError if every column is zero.
FactorState prune_zero_columns(const FactorState& s);

/// ||UV + E - X||_F / ||X||_F. Throws ParameterError for X = 0.
double relative_residual(const Matrix& X, const Matrix& U, const Matrix& V, const Matrix& E);

/// ||E||_{2,1} + mu_U ||U||_{2,1} + mu_V/2 ||V||_F^2.
double objective_value(const Matrix& U, const Matrix& V, const Matrix& E, const SolverConfig& cfg);

struct SolveReport {
  FactorState final;
  std::size_t iterations = 0;
  std::vector<double> residual_history;   // relative residual after each outer step
  std::vector<std::size_t> rank_history;  // nonzero columns of U after each outer step
  std::vector<double> objective_history;
  std::vector<double> beta_history;       // beta used in the step
  std::vector<double> time_history;       // cumulative seconds after each outer step
  std::vector<std::size_t> inner_history;  // (U, V) updates per outer step
  bool converged = false;
  bool degenerate = false;  // all columns pruned
  double wall_time = 0.0;
  std::vector<std::string> warnings;
};

/// One (V, U) update as seen by an observer. `before` is the state the step
/// started from; U_new is the thresholded result before any pruning.
struct UVStep {
  std::size_t t = 0;
  std::size_t inner = 0;
  const FactorState& before;
  const Matrix& V_new;
  const UUpdate& U_new;
};

struct EStep {
  std::size_t t = 0;
  const FactorState& before;  // holds the new U, V and the old E, Y, beta
  const Matrix& E_new;
};

struct SolveObserver {
  std::function<void(const UVStep&)> on_uv_step;
  std::function<void(const EStep&)> on_e_step;
  /// Called after each outer iteration with the state entering the next one.
  std::function<void(const FactorState&, const SolveReport&)> on_iteration;
};

/// Runs ALM / AALM from init_state until the relative residual drops below
/// eps or max_outer iterations. Throws NumericalError (with the iteration
/// index) on non-finite values or an unbounded Lagrangian.
SolveReport solve(const Matrix& X, const SolverConfig& cfg, const SolveObserver* observer = nullptr);

}  // namespace gnrfm
