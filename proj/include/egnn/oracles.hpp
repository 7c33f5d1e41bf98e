#pragma once

// Slow, independent solvers used to validate the message-passing solver and
// the trainer's gradients. Everything here works on dense copies of the
// operators with plain loops; none of it goes through the SIMD kernels or the
// primal-dual iteration.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "egnn/emp.hpp"
#include "egnn/graph.hpp"
#include "egnn/matrix.hpp"

namespace egnn::oracle {

enum class Method { ClosedForm, Subgradient };

std::string_view to_string(Method m);

struct OracleReport {
  Matrix f_star;
  double objective_star = 0.0;
  std::size_t iterations = 0;
  Method method = Method::Subgradient;
  /// Subgradient result refined by the active-set Newton polish.
  bool polished = false;
};

/// Largest graph accepted by the dense solvers.
inline constexpr std::size_t kMaxDenseNodes = 2000;

/// Objective evaluated from the dense Laplacian (quadratic term as F^T L F)
/// and explicit per-edge differences.
double dense_objective(const Matrix& f, const Matrix& x_in, const NormalizedOperators& ops, double lambda1,
                       double lambda2, Penalty mode);

/// (I + lambda2 L)^-1 X_in by dense Cholesky factorization.
Matrix exact_l2_solution(const Matrix& x_in, const NormalizedOperators& ops, double lambda2);

/// alpha (I - (1-alpha) A)^-1 X_in by Gaussian elimination with partial
/// pivoting; equals exact_l2_solution at alpha = 1/(1+lambda2).
Matrix ppnp_solution(const Matrix& x_in, const NormalizedOperators& ops, double alpha);

/// Subgradient descent on the primal objective from F^0 = X_in with
/// normalized steps of length c/sqrt(t), c = 0.1 ||X_in||_F / sqrt(1+lambda1+lambda2).
/// Returns the best iterate seen. Requires n <= 50, d <= 4, iterations >= 1e5
/// unless `allow_small` is set (tests of the oracle itself).
OracleReport subgradient_solve(const Matrix& x_in, const NormalizedOperators& ops, double lambda1, double lambda2,
                               Penalty mode, std::size_t iterations, bool allow_small = false);

/// Running minimum of the subgradient objective, one entry per iteration
/// (first entry is the objective at X_in).
std::vector<double> subgradient_history(const Matrix& x_in, const NormalizedOperators& ops, double lambda1,
                                        double lambda2, Penalty mode, std::size_t iterations);

/// Active-set refinement of an approximate minimizer. Edges whose normalized
/// difference is (nearly) zero are fused, which turns the problem into a
/// smooth one over per-component values that Newton's method solves to
/// machine precision; fusion sets are then improved by local search. Returns
/// the better of the input and the refined point.
OracleReport polish(const OracleReport& start, const Matrix& x_in, const NormalizedOperators& ops, double lambda1,
                    double lambda2, Penalty mode);

/// subgradient_solve followed by polish; closed form when lambda1 == 0.
OracleReport reference_optimum(const Matrix& x_in, const NormalizedOperators& ops, double lambda1, double lambda2,
                               Penalty mode, std::size_t subgradient_iterations = 100000);

/// Central differences (loss(p + h e_i) - loss(p - h e_i)) / (2h) for each
/// coordinate in `coordinates` (all coordinates when empty). h in [1e-7, 1e-3].
std::vector<double> finite_difference_grad(const std::function<double(std::span<const double>)>& loss,
                                           std::span<const double> params, double h,
                                           std::span<const std::size_t> coordinates = {});

std::string report_to_json(const OracleReport& report);

}  // namespace egnn::oracle
