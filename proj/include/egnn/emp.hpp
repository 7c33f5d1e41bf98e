#pragma once

// Elastic message passing: a primal-dual predict/correct iteration that
// solves
//
//   min_F  1/2 ||F - X_in||_F^2 + lambda2/2 tr(F^T L F) + lambda1 ||Delta F||_p
//
// with p = 1 (entrywise, Penalty::L1) or p = 2,1 (row-wise, Penalty::L21),
// where L and Delta are the degree-normalized Laplacian and incidence matrix.
// Each step costs four sparse products and one projection of the dual
// variable onto the unit ball of the dual norm scaled by lambda1.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "egnn/graph.hpp"
#include "egnn/matrix.hpp"

namespace egnn {

enum class Penalty { L1, L21 };

std::string_view to_string(Penalty p);
/// Accepts "l1" and "l21" (case-insensitive). Throws InputError otherwise.
Penalty parse_penalty(std::string_view s);

struct Stepsizes {
  double gamma;
  double beta;
};

/// gamma = 1/(1+lambda2), beta = 1/(2 gamma).
Stepsizes default_stepsizes(double lambda2);

/// Sufficient condition for convergence: gamma < 2/(1+2 lambda2) and
/// beta <= 2/(3 gamma), using ||L|| <= 2.
bool stepsizes_converge(double gamma, double beta, double lambda2);

struct EmpConfig {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gamma = 1.0;
  double beta = 0.5;
  std::size_t iterations = 10;  // K
  Penalty mode = Penalty::L21;
  /// Y = gamma X_in + (1-gamma) A F; only valid when gamma (1+lambda2) = 1.
  bool fast_path = true;
  /// F <- A F, ignoring X_in and the dual variable (the lambda2 -> infinity
  /// aggregation limit).
  bool pure_aggregation = false;
  /// Stop early once ||F^{k+1} - F^k||_F / max(1, ||F^k||_F) <= tolerance.
  std::optional<double> tolerance;
  /// Set by EmpConfig::unchecked; skips the stepsize bound.
  bool skip_stepsize_check = false;

  /// Default stepsizes, fast path enabled, validated.
  static EmpConfig make(double lambda1, double lambda2, std::size_t iterations, Penalty mode);
  /// Explicit stepsizes, validated against the convergence bound. The fast
  /// path is enabled only when gamma matches 1/(1+lambda2).
  static EmpConfig with_stepsizes(double lambda1, double lambda2, double gamma, double beta, std::size_t iterations,
                                  Penalty mode);
  /// Explicit stepsizes without the convergence bound, for experiments.
  static EmpConfig unchecked(double lambda1, double lambda2, double gamma, double beta, std::size_t iterations,
                             Penalty mode);

  /// Throws InputError when a field is out of range, the stepsize bound is
  /// violated (unless unchecked) or fast_path is set with a mismatched gamma.
  void validate() const;
};

struct EmpState {
  Matrix f;  // primal iterate, n x d
  Matrix z;  // dual iterate, m x d
  std::size_t k = 0;

  /// F^0 = X_in, Z^0 = 0.
  static EmpState initial(const Matrix& x_in, std::size_t num_edges);
};

struct ObjectiveBreakdown {
  double fidelity = 0.0;   // 1/2 ||F - X_in||^2
  double quadratic = 0.0;  // lambda2/2 tr(F^T L F)
  double tv = 0.0;         // lambda1 ||Delta F||_1 or ||Delta F||_21
  double total = 0.0;
};

ObjectiveBreakdown objective(const Matrix& f, const Matrix& x_in, const NormalizedOperators& ops, double lambda1,
                             double lambda2, Penalty mode);
ObjectiveBreakdown objective(const Matrix& f, const Matrix& x_in, const NormalizedOperators& ops,
                             const EmpConfig& cfg);

/// Entrywise projection onto [-lambda1, lambda1].
Matrix prox_linf_clip(const Matrix& zbar, double lambda1);
/// Row-wise projection onto the l2 ball of radius lambda1; zero rows stay zero.
Matrix prox_l2ball_rows(const Matrix& zbar, double lambda1);
void prox_linf_clip_inplace(Matrix& z, double lambda1);
void prox_l2ball_rows_inplace(Matrix& z, double lambda1);

/// Step intermediates, reused across iterations to avoid reallocation.
struct EmpWorkspace {
  Matrix y;     // F^k - gamma grad f(F^k)
  Matrix fbar;  // primal prediction
  Matrix zbar;  // dual ascent point before projection
  Matrix scratch;
};

/// Advances `state` by one iteration in place; `ws` holds Y, Fbar, Zbar of
/// this step afterwards. Throws NumericError naming the first stage that
/// produced a non-finite value.
void emp_step_inplace(EmpState& state, const Matrix& x_in, const NormalizedOperators& ops, const EmpConfig& cfg,
                      EmpWorkspace& ws);

EmpState emp_step(const EmpState& state, const Matrix& x_in, const NormalizedOperators& ops, const EmpConfig& cfg);

struct EmpResult {
  Matrix f;
  Matrix z;
  std::size_t iterations = 0;
  bool converged = false;  // tolerance reached (tolerance mode only)
  /// Objective at k = 0..iterations when tracing was requested.
  std::vector<ObjectiveBreakdown> trace;
};

/// Runs cfg.iterations steps (or fewer in tolerance mode) from F^0 = X_in,
/// Z^0 = 0.
EmpResult emp_run(const Matrix& x_in, const NormalizedOperators& ops, const EmpConfig& cfg, bool trace = false);

/// (1 - alpha) A F + alpha X_in, written directly against the CSR arrays.
/// Equivalence oracle for the lambda1 = 0 path.
Matrix appnp_reference_step(const Matrix& f, const Matrix& x_in, const CsrMatrix& a_tilde, double alpha);

/// CSV with header `k,fidelity,quadratic,tv,total`, one row per entry.
void write_trace_csv(std::ostream& out, const std::vector<ObjectiveBreakdown>& trace);

}  // namespace egnn
