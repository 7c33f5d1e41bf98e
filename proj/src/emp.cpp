#include "egnn/emp.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "egnn/error.hpp"
#include "egnn/kernels.hpp"

namespace egnn {

std::string_view to_string(Penalty p) { return p == Penalty::L1 ? "l1" : "l21"; }

Penalty parse_penalty(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "l1") return Penalty::L1;
  if (lower == "l21") return Penalty::L21;
  throw InputError("unknown penalty mode '" + std::string(s) + "' (expected l1 or l21)");
}

Stepsizes default_stepsizes(double lambda2) {
  const double gamma = 1.0 / (1.0 + lambda2);
  return {gamma, 1.0 / (2.0 * gamma)};
}

bool stepsizes_converge(double gamma, double beta, double lambda2) {
  return gamma > 0.0 && beta > 0.0 && gamma < 2.0 / (1.0 + 2.0 * lambda2) && beta <= 2.0 / (3.0 * gamma);
}

EmpConfig EmpConfig::make(double lambda1, double lambda2, std::size_t iterations, Penalty mode) {
  const Stepsizes s = default_stepsizes(lambda2);
  EmpConfig cfg;
  cfg.lambda1 = lambda1;
  cfg.lambda2 = lambda2;
  cfg.gamma = s.gamma;
  cfg.beta = s.beta;
  cfg.iterations = iterations;
  cfg.mode = mode;
  cfg.fast_path = true;
  cfg.validate();
  return cfg;
}

EmpConfig EmpConfig::with_stepsizes(double lambda1, double lambda2, double gamma, double beta, std::size_t iterations,
                                    Penalty mode) {
  EmpConfig cfg;
  cfg.lambda1 = lambda1;
  cfg.lambda2 = lambda2;
  cfg.gamma = gamma;
  cfg.beta = beta;
  cfg.iterations = iterations;
  cfg.mode = mode;
  cfg.fast_path = std::fabs(gamma * (1.0 + lambda2) - 1.0) <= 1e-12;
  cfg.validate();
  return cfg;
}

EmpConfig EmpConfig::unchecked(double lambda1, double lambda2, double gamma, double beta, std::size_t iterations,
                               Penalty mode) {
  EmpConfig cfg;
  cfg.lambda1 = lambda1;
  cfg.lambda2 = lambda2;
  cfg.gamma = gamma;
  cfg.beta = beta;
  cfg.iterations = iterations;
  cfg.mode = mode;
  cfg.fast_path = std::fabs(gamma * (1.0 + lambda2) - 1.0) <= 1e-12;
  cfg.skip_stepsize_check = true;
  cfg.validate();
  return cfg;
}

void EmpConfig::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!finite_nonneg(lambda1)) throw InputError("EmpConfig: lambda1 must be finite and >= 0");
  if (!finite_nonneg(lambda2)) throw InputError("EmpConfig: lambda2 must be finite and >= 0");
  if (!(std::isfinite(gamma) && gamma > 0.0)) throw InputError("EmpConfig: gamma must be > 0");
  if (!(std::isfinite(beta) && beta > 0.0)) throw InputError("EmpConfig: beta must be > 0");
  if (tolerance && !(*tolerance >= 0.0)) throw InputError("EmpConfig: tolerance must be >= 0");
  if (fast_path && std::fabs(gamma * (1.0 + lambda2) - 1.0) > 1e-12)
    throw InputError("EmpConfig: fast path requires gamma = 1/(1+lambda2)");
  if (!skip_stepsize_check && !stepsizes_converge(gamma, beta, lambda2))
    throw InputError("EmpConfig: stepsizes violate gamma < 2/(1+2 lambda2), beta <= 2/(3 gamma) (gamma=" +
                     std::to_string(gamma) + ", beta=" + std::to_string(beta) + ")");
}

EmpState EmpState::initial(const Matrix& x_in, std::size_t num_edges) {
  return EmpState{x_in, Matrix(num_edges, x_in.cols()), 0};
}

namespace {

void check_signal(const Matrix& x_in, const NormalizedOperators& ops, const char* who) {
  if (x_in.rows() != ops.num_nodes())
    throw InputError(std::string(who) + ": signal has " + std::to_string(x_in.rows()) + " rows, graph has " +
                     std::to_string(ops.num_nodes()) + " nodes");
}

void require_finite(const Matrix& m, std::size_t k, const char* stage) {
  if (!m.all_finite())
    throw NumericError("EMP step " + std::to_string(k) + ": non-finite values in " + stage);
}

}  // namespace

ObjectiveBreakdown objective(const Matrix& f, const Matrix& x_in, const NormalizedOperators& ops, double lambda1,
                             double lambda2, Penalty mode) {
  check_signal(x_in, ops, "objective");
  if (!f.same_shape(x_in)) throw InputError("objective: F and X_in shapes differ");
  const auto& k = simd::active();

  ObjectiveBreakdown out;
  double fid = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f.data()[i] - x_in.data()[i];
    fid += d * d;
  }
  out.fidelity = 0.5 * fid;

  Matrix diff;
  ops.delta_tilde.apply(f, diff);
  // tr(F^T L F) = ||Delta F||_F^2 since L = Delta^T Delta.
  out.quadratic = 0.5 * lambda2 * k.sum_squares(diff.size(), diff.data());
  double tv = 0.0;
  if (mode == Penalty::L1) {
    tv = k.abs_sum(diff.size(), diff.data());
  } else {
    for (std::size_t l = 0; l < diff.rows(); ++l) tv += std::sqrt(k.sum_squares(diff.cols(), diff.row(l).data()));
  }
  out.tv = lambda1 * tv;
  out.total = out.fidelity + out.quadratic + out.tv;
  return out;
}

ObjectiveBreakdown objective(const Matrix& f, const Matrix& x_in, const NormalizedOperators& ops,
                             const EmpConfig& cfg) {
  return objective(f, x_in, ops, cfg.lambda1, cfg.lambda2, cfg.mode);
}

void prox_linf_clip_inplace(Matrix& z, double lambda1) {
  simd::active().clip(z.size(), lambda1, z.data(), z.data());
}

void prox_l2ball_rows_inplace(Matrix& z, double lambda1) {
  const auto& k = simd::active();
  for (std::size_t l = 0; l < z.rows(); ++l) {
    double* row = z.row(l).data();
    const double norm = std::sqrt(k.sum_squares(z.cols(), row));
    if (norm > lambda1) k.scale(z.cols(), lambda1 / norm, row, row);
  }
}

Matrix prox_linf_clip(const Matrix& zbar, double lambda1) {
  Matrix out = zbar;
  prox_linf_clip_inplace(out, lambda1);
  return out;
}

Matrix prox_l2ball_rows(const Matrix& zbar, double lambda1) {
  Matrix out = zbar;
  prox_l2ball_rows_inplace(out, lambda1);
  return out;
}

void emp_step_inplace(EmpState& state, const Matrix& x_in, const NormalizedOperators& ops, const EmpConfig& cfg,
                      EmpWorkspace& ws) {
  check_signal(x_in, ops, "emp_step");
  if (!state.f.same_shape(x_in) || state.z.rows() != ops.num_edges() || state.z.cols() != x_in.cols())
    throw InputError("emp_step: state dimensions do not match the input signal and graph");
  const auto& k = simd::active();
  const std::size_t step = state.k + 1;
  const std::size_t n = x_in.rows(), d = x_in.cols(), m = ops.num_edges();

  if (ws.y.rows() != n || ws.y.cols() != d) ws.y = Matrix(n, d);

  if (cfg.pure_aggregation) {
    ws.y.fill(0.0);
    ops.a_tilde.multiply_add(1.0, state.f, ws.y);
    require_finite(ws.y, step, "F");
    std::swap(state.f, ws.y);
    state.k = step;
    return;
  }

  const double gamma = cfg.gamma;
  // Y = F - gamma grad f(F)
  if (cfg.fast_path) {
    k.scale(ws.y.size(), gamma, x_in.data(), ws.y.data());
    ops.a_tilde.multiply_add(1.0 - gamma, state.f, ws.y);
  } else {
    k.axpby(ws.y.size(), 1.0 - gamma, state.f.data(), gamma, x_in.data(), ws.y.data());
    ops.l_tilde.multiply_add(-gamma * cfg.lambda2, state.f, ws.y);
  }
  require_finite(ws.y, step, "Y");

  // Fbar = Y - gamma Delta^T Z
  ws.fbar = ws.y;
  ops.delta_tilde.apply_transpose_add(-gamma, state.z, ws.fbar);
  require_finite(ws.fbar, step, "Fbar");

  // Zbar = Z + beta Delta Fbar
  if (ws.zbar.rows() != m || ws.zbar.cols() != d) ws.zbar = Matrix(m, d);
  std::copy(state.z.values().begin(), state.z.values().end(), ws.zbar.values().begin());
  ops.delta_tilde.apply_add(cfg.beta, ws.fbar, ws.zbar);
  require_finite(ws.zbar, step, "Zbar");

  // Z = prox(Zbar)
  std::copy(ws.zbar.values().begin(), ws.zbar.values().end(), state.z.values().begin());
  if (cfg.mode == Penalty::L1) prox_linf_clip_inplace(state.z, cfg.lambda1);
  else prox_l2ball_rows_inplace(state.z, cfg.lambda1);

  // F = Y - gamma Delta^T Z
  std::copy(ws.y.values().begin(), ws.y.values().end(), state.f.values().begin());
  ops.delta_tilde.apply_transpose_add(-gamma, state.z, state.f);
  require_finite(state.f, step, "F");
  state.k = step;
}

EmpState emp_step(const EmpState& state, const Matrix& x_in, const NormalizedOperators& ops, const EmpConfig& cfg) {
  EmpState next = state;
  EmpWorkspace ws;
  emp_step_inplace(next, x_in, ops, cfg, ws);
  return next;
}

EmpResult emp_run(const Matrix& x_in, const NormalizedOperators& ops, const EmpConfig& cfg, bool trace) {
  check_signal(x_in, ops, "emp_run");
  cfg.validate();
  EmpState state = EmpState::initial(x_in, ops.num_edges());
  EmpWorkspace ws;
  EmpResult result;
  if (trace) result.trace.push_back(objective(state.f, x_in, ops, cfg));

  Matrix previous;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    if (cfg.tolerance) previous = state.f;
    emp_step_inplace(state, x_in, ops, cfg, ws);
    if (trace) result.trace.push_back(objective(state.f, x_in, ops, cfg));
    if (cfg.tolerance) {
      const double change = frobenius_distance(state.f, previous);
      if (change <= *cfg.tolerance * std::max(1.0, frobenius_norm(previous))) {
        result.converged = true;
        break;
      }
    }
  }
  result.iterations = state.k;
  result.f = std::move(state.f);
  result.z = std::move(state.z);
  return result;
}

Matrix appnp_reference_step(const Matrix& f, const Matrix& x_in, const CsrMatrix& a_tilde, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("appnp_reference_step: alpha must lie in (0, 1]");
  if (!f.same_shape(x_in) || f.rows() != a_tilde.rows()) throw InputError("appnp_reference_step: shape mismatch");
  const auto row_ptr = a_tilde.row_ptr();
  const auto cols = a_tilde.col_idx();
  const auto vals = a_tilde.values();
  Matrix out(f.rows(), f.cols());
  for (std::size_t i = 0; i < f.rows(); ++i) {
    for (std::size_t j = 0; j < f.cols(); ++j) {
      double agg = 0.0;
      for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) agg += vals[p] * f(cols[p], j);
      out(i, j) = (1.0 - alpha) * agg + alpha * x_in(i, j);
    }
  }
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<ObjectiveBreakdown>& trace) {
  auto put = [&out](double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    out << ',' << std::string_view(buf, static_cast<std::size_t>(r.ptr - buf));
  };
  out << "k,fidelity,quadratic,tv,total\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << k;
    put(trace[k].fidelity);
    put(trace[k].quadratic);
    put(trace[k].tv);
    put(trace[k].total);
    out << '\n';
  }
}

}  // namespace egnn
