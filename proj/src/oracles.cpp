#include "egnn/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <json.hpp>

#include "egnn/error.hpp"

namespace egnn::oracle {

std::string_view to_string(Method m) { return m == Method::ClosedForm ? "CLOSED_FORM" : "SUBGRADIENT"; }

namespace {

// ---- dense linear algebra --------------------------------------------------

// Solves A X = B for symmetric positive definite A (lower Cholesky factor).
Matrix cholesky_solve(Matrix a, const Matrix& b) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= a(j, k) * a(j, k);
    if (!(diag > 0.0)) throw NumericError("cholesky_solve: matrix is not positive definite");
    const double ljj = std::sqrt(diag);
    a(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= a(i, k) * a(j, k);
      a(i, j) = v / ljj;
    }
  }
  Matrix x = b;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = x(i, c);
      for (std::size_t k = 0; k < i; ++k) v -= a(i, k) * x(k, c);
      x(i, c) = v / a(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double v = x(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) v -= a(k, ii) * x(k, c);
      x(ii, c) = v / a(ii, ii);
    }
  }
  return x;
}

// Gaussian elimination with partial pivoting.
Matrix lu_solve(Matrix a, Matrix b) {
  const std::size_t n = a.rows();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a(r, col)) > std::fabs(a(pivot, col))) pivot = r;
    if (a(pivot, col) == 0.0) throw NumericError("lu_solve: singular matrix");
    if (pivot != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a(col, k), a(pivot, k));
      for (std::size_t k = 0; k < b.cols(); ++k) std::swap(b(col, k), b(pivot, k));
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a(r, col) / a(col, col);
      if (factor == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a(r, k) -= factor * a(col, k);
      for (std::size_t k = 0; k < b.cols(); ++k) b(r, k) -= factor * b(col, k);
    }
  }
  for (std::size_t c = 0; c < b.cols(); ++c)
    for (std::size_t ii = n; ii-- > 0;) {
      double v = b(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) v -= a(ii, k) * b(k, c);
      b(ii, c) = v / a(ii, ii);
    }
  return b;
}

void require_dense_size(const Matrix& x_in, const NormalizedOperators& ops, const char* who) {
  if (x_in.rows() != ops.num_nodes())
    throw InputError(std::string(who) + ": signal rows do not match the graph");
  if (ops.num_nodes() > kMaxDenseNodes)
    throw InputError(std::string(who) + ": dense oracle limited to " + std::to_string(kMaxDenseNodes) + " nodes");
}

// Edge rows of the normalized incidence matrix, read back from its dense form.
struct DenseEdge {
  std::size_t i, j;
  double a, b;  // row = a e_i + b e_j
};

std::vector<DenseEdge> dense_edges(const NormalizedOperators& ops) {
  const Matrix delta = ops.delta_tilde.to_dense();
  std::vector<DenseEdge> edges;
  edges.reserve(delta.rows());
  for (std::size_t l = 0; l < delta.rows(); ++l) {
    DenseEdge e{0, 0, 0.0, 0.0};
    int found = 0;
    for (std::size_t c = 0; c < delta.cols(); ++c) {
      if (delta(l, c) == 0.0) continue;
      if (found == 0) {
        e.i = c;
        e.a = delta(l, c);
      } else {
        e.j = c;
        e.b = delta(l, c);
      }
      ++found;
    }
    if (found != 2) throw NumericError("dense_edges: incidence row without two nonzeros");
    edges.push_back(e);
  }
  return edges;
}

double edge_penalty(const DenseEdge& e, const Matrix& f, Penalty mode) {
  double acc = 0.0;
  for (std::size_t c = 0; c < f.cols(); ++c) {
    const double v = e.a * f(e.i, c) + e.b * f(e.j, c);
    acc += mode == Penalty::L1 ? std::fabs(v) : v * v;
  }
  return mode == Penalty::L1 ? acc : std::sqrt(acc);
}

struct DenseProblem {
  Matrix x;
  Matrix laplacian;
  std::vector<DenseEdge> edges;
  double lambda1, lambda2;
  Penalty mode;

  double objective(const Matrix& f) const {
    double fid = 0.0, quad = 0.0, tv = 0.0;
    for (std::size_t i = 0; i < f.rows(); ++i)
      for (std::size_t c = 0; c < f.cols(); ++c) {
        const double d = f(i, c) - x(i, c);
        fid += d * d;
      }
    for (std::size_t c = 0; c < f.cols(); ++c)
      for (std::size_t i = 0; i < f.rows(); ++i) {
        double li = 0.0;
        for (std::size_t k = 0; k < f.rows(); ++k) li += laplacian(i, k) * f(k, c);
        quad += f(i, c) * li;
      }
    for (const auto& e : edges) tv += edge_penalty(e, f, mode);
    return 0.5 * fid + 0.5 * lambda2 * quad + lambda1 * tv;
  }

  // A subgradient; zero differences contribute zero.
  Matrix subgradient(const Matrix& f) const {
    const std::size_t n = f.rows(), d = f.cols();
    Matrix g(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) {
        double li = 0.0;
        for (std::size_t k = 0; k < n; ++k) li += laplacian(i, k) * f(k, c);
        g(i, c) = f(i, c) - x(i, c) + lambda2 * li;
      }
    if (lambda1 == 0.0) return g;
    std::vector<double> diff(d);
    for (const auto& e : edges) {
      double norm2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        diff[c] = e.a * f(e.i, c) + e.b * f(e.j, c);
        norm2 += diff[c] * diff[c];
      }
      if (norm2 == 0.0) continue;
      const double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t c = 0; c < d; ++c) {
        double s = 0.0;
        if (mode == Penalty::L1) s = diff[c] > 0.0 ? 1.0 : (diff[c] < 0.0 ? -1.0 : 0.0);
        else s = diff[c] * inv;
        g(e.i, c) += lambda1 * e.a * s;
        g(e.j, c) += lambda1 * e.b * s;
      }
    }
    return g;
  }
};

DenseProblem make_problem(const Matrix& x_in, const NormalizedOperators& ops, double lambda1, double lambda2,
                          Penalty mode) {
  return DenseProblem{x_in, ops.l_tilde.to_dense(), dense_edges(ops), lambda1, lambda2, mode};
}

// ---- active-set polish -----------------------------------------------------

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Group-penalty problem over per-component values: node i in component C(i)
// takes F_i = s_i V_C, so every intra-component difference vanishes.
struct ReducedProblem {
  const Matrix& x;                 // n x d
  const std::vector<double>& s;    // sqrt degrees
  const std::vector<DenseEdge>& edges;
  const std::vector<double>& w;    // edge weights: row = w (F_j/s_j - F_i/s_i)
  double lambda1, lambda2;
};

struct Partition {
  std::vector<std::size_t> component;  // node -> component id
  std::size_t count = 0;
};

Partition partition_from(std::size_t n, const std::vector<DenseEdge>& edges, const std::vector<bool>& fused) {
  DisjointSets sets(n);
  for (std::size_t l = 0; l < edges.size(); ++l)
    if (fused[l]) sets.unite(edges[l].i, edges[l].j);
  Partition p;
  p.component.assign(n, 0);
  std::vector<std::size_t> label(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t r = sets.find(v);
    if (label[r] == std::numeric_limits<std::size_t>::max()) label[r] = p.count++;
    p.component[v] = label[r];
  }
  return p;
}

double reduced_value(const ReducedProblem& rp, const Partition& part, const Matrix& v) {
  const std::size_t d = rp.x.cols();
  double val = 0.0;
  for (std::size_t i = 0; i < rp.x.rows(); ++i)
    for (std::size_t c = 0; c < d; ++c) {
      const double r = rp.s[i] * v(part.component[i], c) - rp.x(i, c);
      val += 0.5 * r * r;
    }
  for (std::size_t l = 0; l < rp.edges.size(); ++l) {
    const std::size_t ci = part.component[rp.edges[l].i], cj = part.component[rp.edges[l].j];
    if (ci == cj) continue;
    double n2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = v(cj, c) - v(ci, c);
      n2 += diff * diff;
    }
    val += 0.5 * rp.lambda2 * rp.w[l] * rp.w[l] * n2 + rp.lambda1 * rp.w[l] * std::sqrt(n2);
  }
  return val;
}

// Newton's method with backtracking on the smooth reduced objective.
Matrix reduced_newton(const ReducedProblem& rp, const Partition& part, Matrix v) {
  const std::size_t d = rp.x.cols();
  const std::size_t p = part.count;
  const std::size_t dim = p * d;
  for (int it = 0; it < 200; ++it) {
    Matrix grad(dim, 1);
    Matrix hess(dim, dim);
    for (std::size_t i = 0; i < rp.x.rows(); ++i) {
      const std::size_t ci = part.component[i];
      for (std::size_t c = 0; c < d; ++c) {
        grad(ci * d + c, 0) += rp.s[i] * (rp.s[i] * v(ci, c) - rp.x(i, c));
        hess(ci * d + c, ci * d + c) += rp.s[i] * rp.s[i];
      }
    }
    std::vector<double> diff(d);
    for (std::size_t l = 0; l < rp.edges.size(); ++l) {
      const std::size_t ci = part.component[rp.edges[l].i], cj = part.component[rp.edges[l].j];
      if (ci == cj) continue;
      double n2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        diff[c] = v(cj, c) - v(ci, c);
        n2 += diff[c] * diff[c];
      }
      const double w = rp.w[l];
      const double q = rp.lambda2 * w * w;
      const double norm = std::sqrt(n2);
      for (std::size_t a = 0; a < d; ++a) {
        double g = q * diff[a];
        if (norm > 0.0) g += rp.lambda1 * w * diff[a] / norm;
        grad(cj * d + a, 0) += g;
        grad(ci * d + a, 0) -= g;
        for (std::size_t b = 0; b < d; ++b) {
          double h = a == b ? q : 0.0;
          if (norm > 0.0) h += rp.lambda1 * w * ((a == b ? 1.0 : 0.0) - diff[a] * diff[b] / n2) / norm;
          hess(cj * d + a, cj * d + b) += h;
          hess(ci * d + a, ci * d + b) += h;
          hess(cj * d + a, ci * d + b) -= h;
          hess(ci * d + a, cj * d + b) -= h;
        }
      }
    }
    Matrix neg_grad(dim, 1);
    for (std::size_t k = 0; k < dim; ++k) neg_grad(k, 0) = -grad(k, 0);
    Matrix step;
    try {
      step = cholesky_solve(hess, neg_grad);
    } catch (const NumericError&) {
      break;
    }
    double slope = 0.0;
    for (std::size_t k = 0; k < dim; ++k) slope += grad(k, 0) * step(k, 0);
    const double current = reduced_value(rp, part, v);
    if (-slope <= 1e-30 * std::max(1.0, std::fabs(current))) break;

    double t = 1.0;
    Matrix trial = v;
    bool accepted = false;
    while (t > 1e-14) {
      for (std::size_t k = 0; k < dim; ++k) trial.data()[k] = v.data()[k] + t * step(k, 0);
      if (reduced_value(rp, part, trial) <= current + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    v = trial;
  }
  return v;
}

Matrix expand(const ReducedProblem& rp, const Partition& part, const Matrix& v) {
  Matrix f(rp.x.rows(), rp.x.cols());
  for (std::size_t i = 0; i < f.rows(); ++i)
    for (std::size_t c = 0; c < f.cols(); ++c) f(i, c) = rp.s[i] * v(part.component[i], c);
  return f;
}

// Least-squares fit of per-component values to a full signal.
Matrix fit_components(const ReducedProblem& rp, const Partition& part, const Matrix& f) {
  Matrix num(part.count, f.cols());
  std::vector<double> den(part.count, 0.0);
  for (std::size_t i = 0; i < f.rows(); ++i) {
    const std::size_t ci = part.component[i];
    den[ci] += rp.s[i] * rp.s[i];
    for (std::size_t c = 0; c < f.cols(); ++c) num(ci, c) += rp.s[i] * f(i, c);
  }
  for (std::size_t k = 0; k < part.count; ++k)
    for (std::size_t c = 0; c < f.cols(); ++c) num(k, c) /= den[k];
  return num;
}

struct Candidate {
  Matrix f;
  double value = std::numeric_limits<double>::infinity();
  std::vector<bool> fused;
};

// Solves the reduced problem for a fusion set; components whose values
// collapse onto each other are merged and the solve repeated.
Candidate solve_fusion(const ReducedProblem& rp, std::vector<bool> fused, const Matrix& warm) {
  const double scale = 1.0 + frobenius_norm(rp.x);
  for (std::size_t round = 0; round <= rp.edges.size(); ++round) {
    const Partition part = partition_from(rp.x.rows(), rp.edges, fused);
    Matrix v = reduced_newton(rp, part, fit_components(rp, part, warm));
    bool merged = false;
    for (std::size_t l = 0; l < rp.edges.size(); ++l) {
      const std::size_t ci = part.component[rp.edges[l].i], cj = part.component[rp.edges[l].j];
      if (ci == cj) {
        fused[l] = true;
        continue;
      }
      double n2 = 0.0;
      for (std::size_t c = 0; c < v.cols(); ++c) {
        const double diff = v(cj, c) - v(ci, c);
        n2 += diff * diff;
      }
      if (std::sqrt(n2) * rp.w[l] <= 1e-11 * scale) {
        fused[l] = true;
        merged = true;
      }
    }
    if (!merged) return Candidate{expand(rp, part, v), reduced_value(rp, part, v), fused};
  }
  return Candidate{};
}

// Fusion-set search for a single group-penalty problem (L21, or one column of L1).
Matrix polish_group(const Matrix& start, const Matrix& x, const std::vector<double>& s,
                    const std::vector<DenseEdge>& edges, double lambda1, double lambda2) {
  std::vector<double> w(edges.size());
  for (std::size_t l = 0; l < edges.size(); ++l) w[l] = std::fabs(edges[l].b) * s[edges[l].j];
  const ReducedProblem rp{x, s, edges, w, lambda1, lambda2};

  std::vector<double> gap(edges.size());
  double scale = 0.0;
  for (std::size_t l = 0; l < edges.size(); ++l) {
    double n2 = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double v = edges[l].a * start(edges[l].i, c) + edges[l].b * start(edges[l].j, c);
      n2 += v * v;
    }
    gap[l] = std::sqrt(n2);
  }
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t c = 0; c < x.cols(); ++c) scale = std::max(scale, std::fabs(x(i, c)));
  if (scale == 0.0) scale = 1.0;

  Candidate best;
  std::set<std::vector<bool>> tried;
  auto consider = [&](const std::vector<bool>& fused) {
    if (!tried.insert(fused).second) return false;
    Candidate c = solve_fusion(rp, fused, start);
    tried.insert(c.fused);
    if (std::isinf(best.value) ? c.value < best.value : c.value < best.value - 1e-15 * std::fabs(best.value)) {
      best = std::move(c);
      return true;
    }
    return false;
  };

  consider(std::vector<bool>(edges.size(), false));
  for (int k = 2; k <= 18; ++k) {
    const double tau = scale * std::pow(10.0, -0.5 * k);
    std::vector<bool> fused(edges.size());
    for (std::size_t l = 0; l < edges.size(); ++l) fused[l] = gap[l] <= tau;
    consider(fused);
  }
  if (best.fused.empty()) return start;

  // Local search: toggle single edges of the best fusion set.
  for (int round = 0; round < 50; ++round) {
    bool improved = false;
    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t l : order) {
      if (!best.fused[l]) continue;
      std::vector<bool> fused = best.fused;
      fused[l] = false;
      if (consider(fused)) {
        improved = true;
        break;
      }
    }
    if (improved) continue;
    // Fuse candidates: inter-component edges with the smallest differences.
    std::vector<std::pair<double, std::size_t>> open;
    for (std::size_t l = 0; l < edges.size(); ++l) {
      if (best.fused[l]) continue;
      double n2 = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double v = edges[l].a * best.f(edges[l].i, c) + edges[l].b * best.f(edges[l].j, c);
        n2 += v * v;
      }
      open.emplace_back(n2, l);
    }
    std::sort(open.begin(), open.end());
    for (std::size_t k = 0; k < std::min<std::size_t>(open.size(), 40); ++k) {
      std::vector<bool> fused = best.fused;
      fused[open[k].second] = true;
      if (consider(fused)) {
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return best.f;
}

}  // namespace

double dense_objective(const Matrix& f, const Matrix& x_in, const NormalizedOperators& ops, double lambda1,
                       double lambda2, Penalty mode) {
  require_dense_size(x_in, ops, "dense_objective");
  if (!f.same_shape(x_in)) throw InputError("dense_objective: F and X_in shapes differ");
  return make_problem(x_in, ops, lambda1, lambda2, mode).objective(f);
}

Matrix exact_l2_solution(const Matrix& x_in, const NormalizedOperators& ops, double lambda2) {
  require_dense_size(x_in, ops, "exact_l2_solution");
  if (!(lambda2 >= 0.0)) throw InputError("exact_l2_solution: lambda2 must be >= 0");
  Matrix system = ops.l_tilde.to_dense();
  for (std::size_t i = 0; i < system.rows(); ++i)
    for (std::size_t j = 0; j < system.cols(); ++j) system(i, j) = (i == j ? 1.0 : 0.0) + lambda2 * system(i, j);
  return cholesky_solve(std::move(system), x_in);
}

Matrix ppnp_solution(const Matrix& x_in, const NormalizedOperators& ops, double alpha) {
  require_dense_size(x_in, ops, "ppnp_solution");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("ppnp_solution: alpha must lie in (0, 1]");
  Matrix system = ops.a_tilde.to_dense();
  for (std::size_t i = 0; i < system.rows(); ++i)
    for (std::size_t j = 0; j < system.cols(); ++j) system(i, j) = (i == j ? 1.0 : 0.0) - (1.0 - alpha) * system(i, j);
  Matrix rhs = x_in;
  for (auto& v : rhs.values()) v *= alpha;
  return lu_solve(std::move(system), std::move(rhs));
}

namespace {

template <typename Visit>
OracleReport run_subgradient(const DenseProblem& prob, std::size_t iterations, Visit&& visit) {
  OracleReport report;
  report.method = Method::Subgradient;
  Matrix f = prob.x;
  report.f_star = f;
  report.objective_star = prob.objective(f);
  visit(report.objective_star);
  const double c = 0.1 * frobenius_norm(prob.x) / std::sqrt(1.0 + prob.lambda1 + prob.lambda2);
  std::size_t t = 0;
  if (c > 0.0) {
    for (t = 1; t <= iterations; ++t) {
      const Matrix g = prob.subgradient(f);
      double gn = 0.0;
      for (double v : g.values()) gn += v * v;
      gn = std::sqrt(gn);
      if (gn == 0.0) break;
      const double step = c / std::sqrt(static_cast<double>(t)) / gn;
      for (std::size_t k = 0; k < f.size(); ++k) f.data()[k] -= step * g.data()[k];
      if (!f.all_finite()) throw NumericError("subgradient_solve: non-finite iterate at t=" + std::to_string(t));
      const double val = prob.objective(f);
      if (val < report.objective_star) {
        report.objective_star = val;
        report.f_star = f;
      }
      visit(report.objective_star);
    }
  }
  report.iterations = std::min(t, iterations);
  return report;
}

void check_subgradient_args(const Matrix& x_in, const NormalizedOperators& ops, double lambda1, double lambda2,
                            std::size_t iterations, bool allow_small) {
  require_dense_size(x_in, ops, "subgradient_solve");
  if (!(lambda1 >= 0.0 && lambda2 >= 0.0)) throw InputError("subgradient_solve: lambdas must be >= 0");
  if (!allow_small && (ops.num_nodes() > 50 || x_in.cols() > 4 || iterations < 100000))
    throw InputError("subgradient_solve: requires n <= 50, d <= 4 and at least 1e5 iterations");
}

}  // namespace

OracleReport subgradient_solve(const Matrix& x_in, const NormalizedOperators& ops, double lambda1, double lambda2,
                               Penalty mode, std::size_t iterations, bool allow_small) {
  check_subgradient_args(x_in, ops, lambda1, lambda2, iterations, allow_small);
  const DenseProblem prob = make_problem(x_in, ops, lambda1, lambda2, mode);
  return run_subgradient(prob, iterations, [](double) {});
}

std::vector<double> subgradient_history(const Matrix& x_in, const NormalizedOperators& ops, double lambda1,
                                        double lambda2, Penalty mode, std::size_t iterations) {
  check_subgradient_args(x_in, ops, lambda1, lambda2, iterations, true);
  const DenseProblem prob = make_problem(x_in, ops, lambda1, lambda2, mode);
  std::vector<double> history;
  history.reserve(iterations + 1);
  run_subgradient(prob, iterations, [&](double best) { history.push_back(best); });
  return history;
}

OracleReport polish(const OracleReport& start, const Matrix& x_in, const NormalizedOperators& ops, double lambda1,
                    double lambda2, Penalty mode) {
  require_dense_size(x_in, ops, "polish");
  const DenseProblem prob = make_problem(x_in, ops, lambda1, lambda2, mode);
  std::vector<double> s(ops.num_nodes());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(ops.degrees[i]);

  Matrix refined;
  if (mode == Penalty::L1 && x_in.cols() > 1) {
    // The entrywise penalty separates over columns; each column is a
    // one-dimensional group problem.
    std::vector<Matrix> cols;
    for (std::size_t c = 0; c < x_in.cols(); ++c)
      cols.push_back(polish_group(start.f_star.column(c), x_in.column(c), s, prob.edges, lambda1, lambda2));
    refined = hstack(cols);
  } else {
    refined = polish_group(start.f_star, x_in, s, prob.edges, lambda1, lambda2);
  }

  OracleReport out = start;
  const double value = prob.objective(refined);
  if (value < start.objective_star) {
    out.f_star = std::move(refined);
    out.objective_star = value;
    out.polished = true;
  }
  return out;
}

OracleReport reference_optimum(const Matrix& x_in, const NormalizedOperators& ops, double lambda1, double lambda2,
                               Penalty mode, std::size_t subgradient_iterations) {
  if (lambda1 == 0.0) {
    OracleReport r;
    r.method = Method::ClosedForm;
    r.f_star = exact_l2_solution(x_in, ops, lambda2);
    r.objective_star = dense_objective(r.f_star, x_in, ops, 0.0, lambda2, mode);
    return r;
  }
  const OracleReport sub = subgradient_solve(x_in, ops, lambda1, lambda2, mode, subgradient_iterations);
  return polish(sub, x_in, ops, lambda1, lambda2, mode);
}

std::vector<double> finite_difference_grad(const std::function<double(std::span<const double>)>& loss,
                                           std::span<const double> params, double h,
                                           std::span<const std::size_t> coordinates) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw InputError("finite_difference_grad: h must lie in [1e-7, 1e-3]");
  std::vector<double> p(params.begin(), params.end());
  std::vector<std::size_t> coords(coordinates.begin(), coordinates.end());
  if (coords.empty()) {
    coords.resize(p.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
  }
  std::vector<double> grad;
  grad.reserve(coords.size());
  for (std::size_t i : coords) {
    if (i >= p.size()) throw InputError("finite_difference_grad: coordinate out of range");
    const double orig = p[i];
    p[i] = orig + h;
    const double up = loss(p);
    p[i] = orig - h;
    const double down = loss(p);
    p[i] = orig;
    grad.push_back((up - down) / (2.0 * h));
  }
  return grad;
}

std::string report_to_json(const OracleReport& report) {
  nlohmann::json j;
  j["method"] = std::string(to_string(report.method));
  j["objective_star"] = report.objective_star;
  j["iterations"] = report.iterations;
  j["polished"] = report.polished;
  j["rows"] = report.f_star.rows();
  j["cols"] = report.f_star.cols();
  j["f_star"] = std::vector<double>(report.f_star.values().begin(), report.f_star.values().end());
  return j.dump();
}

}  // namespace egnn::oracle
