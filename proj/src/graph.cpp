#include "egnn/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_set>

#include "egnn/error.hpp"
#include "egnn/kernels.hpp"

namespace egnn {

// ---- CsrMatrix -------------------------------------------------------------

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                     std::vector<std::size_t> col_idx, std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {
  if (row_ptr_.size() != rows_ + 1 || row_ptr_.back() != col_idx_.size() || col_idx_.size() != values_.size())
    throw InputError("CsrMatrix: inconsistent compressed-row arrays");
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

void CsrMatrix::multiply_add(double alpha, const Matrix& x, Matrix& y) const {
  if (x.rows() != cols_ || y.rows() != rows_ || x.cols() != y.cols())
    throw InputError("CsrMatrix::multiply_add: dimension mismatch");
  const auto& k = simd::active();
  const std::size_t d = x.cols();
  for (std::size_t i = 0; i < rows_; ++i) {
    double* out = y.row(i).data();
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) k.axpy(d, alpha * values_[p], x.row(col_idx_[p]).data(), out);
  }
}

Matrix CsrMatrix::multiply(const Matrix& x) const {
  Matrix y(rows_, x.cols());
  multiply_add(1.0, x, y);
  return y;
}

Matrix CsrMatrix::to_dense() const {
  Matrix d(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) d(i, col_idx_[p]) += values_[p];
  return d;
}

bool CsrMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
      if (std::fabs(values_[p] - at(col_idx_[p], i)) > tol) return false;
  return true;
}

// ---- Graph -----------------------------------------------------------------

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<std::size_t, std::size_t>& p) const noexcept {
    return std::hash<std::size_t>{}(p.first * 0x9E3779B97F4A7C15ULL ^ p.second);
  }
};

// Symmetric CSR from canonical edges, optionally with a diagonal.
CsrMatrix symmetric_csr(std::size_t n, std::span<const Edge> edges, std::span<const double> edge_values,
                        std::span<const double> diagonal) {
  std::vector<std::size_t> counts(n, diagonal.empty() ? 0 : 1);
  for (const Edge& e : edges) {
    ++counts[e.source];
    ++counts[e.target];
  }
  std::vector<std::size_t> row_ptr(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) row_ptr[i + 1] = row_ptr[i] + counts[i];

  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].reserve(counts[i]);
    if (!diagonal.empty()) rows[i].emplace_back(i, diagonal[i]);
  }
  for (std::size_t l = 0; l < edges.size(); ++l) {
    rows[edges[l].source].emplace_back(edges[l].target, edge_values[l]);
    rows[edges[l].target].emplace_back(edges[l].source, edge_values[l]);
  }
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  col_idx.reserve(row_ptr[n]);
  values.reserve(row_ptr[n]);
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    for (const auto& [c, v] : r) {
      col_idx.push_back(c);
      values.push_back(v);
    }
  }
  return CsrMatrix(n, n, std::move(row_ptr), std::move(col_idx), std::move(values));
}

}  // namespace

Graph build_graph(std::span<const Edge> edge_list, std::size_t n) {
  if (n == 0) throw InputError("build_graph: node count must be positive");
  Graph g;
  g.n_ = n;
  std::unordered_set<std::pair<std::size_t, std::size_t>, PairHash> seen;
  seen.reserve(edge_list.size());
  for (const Edge& e : edge_list) {
    if (e.source >= n || e.target >= n)
      throw InputError("build_graph: edge (" + std::to_string(e.source) + ", " + std::to_string(e.target) +
                       ") references a node outside [0, " + std::to_string(n) + ")");
    if (!(std::isfinite(e.weight) && e.weight > 0.0))
      throw InputError("build_graph: edge weights must be positive and finite");
    if (e.source == e.target) continue;
    const auto key = std::minmax(e.source, e.target);
    if (!seen.emplace(key.first, key.second).second) continue;
    g.edges_.push_back(Edge{key.first, key.second, e.weight});
    if (e.weight != 1.0) g.weighted_ = true;
  }
  std::sort(g.edges_.begin(), g.edges_.end(), [](const Edge& a, const Edge& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  std::vector<double> values(g.edges_.size());
  std::transform(g.edges_.begin(), g.edges_.end(), values.begin(), [](const Edge& e) { return e.weight * e.weight; });
  g.adjacency_ = symmetric_csr(n, g.edges_, values, {});
  return g;
}

// ---- IncidenceMatrix -------------------------------------------------------

IncidenceMatrix::IncidenceMatrix(std::size_t num_nodes, std::vector<std::size_t> tails, std::vector<std::size_t> heads,
                                 std::vector<double> tail_coefs, std::vector<double> head_coefs)
    : n_(num_nodes),
      tails_(std::move(tails)),
      heads_(std::move(heads)),
      tail_coefs_(std::move(tail_coefs)),
      head_coefs_(std::move(head_coefs)) {
  const std::size_t m = tails_.size();
  if (heads_.size() != m || tail_coefs_.size() != m || head_coefs_.size() != m)
    throw InputError("IncidenceMatrix: inconsistent edge arrays");
  for (std::size_t l = 0; l < m; ++l)
    if (tails_[l] >= n_ || heads_[l] >= n_ || tails_[l] == heads_[l])
      throw InputError("IncidenceMatrix: invalid endpoints for edge " + std::to_string(l));
  build_node_index();
}

void IncidenceMatrix::build_node_index() {
  std::vector<std::size_t> counts(n_, 0);
  for (std::size_t l = 0; l < tails_.size(); ++l) {
    ++counts[tails_[l]];
    ++counts[heads_[l]];
  }
  node_ptr_.assign(n_ + 1, 0);
  for (std::size_t i = 0; i < n_; ++i) node_ptr_[i + 1] = node_ptr_[i] + counts[i];
  node_edges_.assign(node_ptr_[n_], 0);
  node_coefs_.assign(node_ptr_[n_], 0.0);
  std::vector<std::size_t> cursor(node_ptr_.begin(), node_ptr_.end() - 1);
  // Edges are visited in ascending order, so each node's list is sorted.
  for (std::size_t l = 0; l < tails_.size(); ++l) {
    node_edges_[cursor[tails_[l]]] = l;
    node_coefs_[cursor[tails_[l]]++] = tail_coefs_[l];
    node_edges_[cursor[heads_[l]]] = l;
    node_coefs_[cursor[heads_[l]]++] = head_coefs_[l];
  }
}

void IncidenceMatrix::apply(const Matrix& f, Matrix& out) const {
  if (f.rows() != n_) throw InputError("IncidenceMatrix::apply: expected " + std::to_string(n_) + " rows");
  if (out.rows() != rows() || out.cols() != f.cols()) out = Matrix(rows(), f.cols());
  const auto& k = simd::active();
  const std::size_t d = f.cols();
  for (std::size_t l = 0; l < rows(); ++l)
    k.axpby(d, tail_coefs_[l], f.row(tails_[l]).data(), head_coefs_[l], f.row(heads_[l]).data(), out.row(l).data());
}

void IncidenceMatrix::apply_add(double alpha, const Matrix& f, Matrix& out) const {
  if (f.rows() != n_ || out.rows() != rows() || out.cols() != f.cols())
    throw InputError("IncidenceMatrix::apply_add: dimension mismatch");
  const auto& k = simd::active();
  const std::size_t d = f.cols();
  for (std::size_t l = 0; l < rows(); ++l) {
    double* o = out.row(l).data();
    k.axpy(d, alpha * tail_coefs_[l], f.row(tails_[l]).data(), o);
    k.axpy(d, alpha * head_coefs_[l], f.row(heads_[l]).data(), o);
  }
}

void IncidenceMatrix::apply_transpose(const Matrix& z, Matrix& out) const {
  if (out.rows() != n_ || out.cols() != z.cols()) out = Matrix(n_, z.cols());
  else out.fill(0.0);
  apply_transpose_add(1.0, z, out);
}

void IncidenceMatrix::apply_transpose_add(double alpha, const Matrix& z, Matrix& out) const {
  if (z.rows() != rows() || out.rows() != n_ || out.cols() != z.cols())
    throw InputError("IncidenceMatrix::apply_transpose_add: dimension mismatch");
  const auto& k = simd::active();
  const std::size_t d = z.cols();
  for (std::size_t i = 0; i < n_; ++i) {
    double* o = out.row(i).data();
    for (std::size_t p = node_ptr_[i]; p < node_ptr_[i + 1]; ++p)
      k.axpy(d, alpha * node_coefs_[p], z.row(node_edges_[p]).data(), o);
  }
}

IncidenceMatrix IncidenceMatrix::flipped(std::size_t edge) const {
  if (edge >= rows()) throw InputError("IncidenceMatrix::flipped: edge index out of range");
  IncidenceMatrix copy = *this;
  std::swap(copy.tails_[edge], copy.heads_[edge]);
  std::swap(copy.tail_coefs_[edge], copy.head_coefs_[edge]);
  copy.tail_coefs_[edge] = -copy.tail_coefs_[edge];
  copy.head_coefs_[edge] = -copy.head_coefs_[edge];
  copy.build_node_index();
  return copy;
}

Matrix IncidenceMatrix::to_dense() const {
  Matrix d(rows(), n_);
  for (std::size_t l = 0; l < rows(); ++l) {
    d(l, tails_[l]) += tail_coefs_[l];
    d(l, heads_[l]) += head_coefs_[l];
  }
  return d;
}

Matrix incidence_gram(const IncidenceMatrix& delta) {
  Matrix g(delta.cols(), delta.cols());
  for (std::size_t l = 0; l < delta.rows(); ++l) {
    const std::size_t i = delta.tail(l), j = delta.head(l);
    const double a = delta.tail_coef(l), b = delta.head_coef(l);
    g(i, i) += a * a;
    g(j, j) += b * b;
    g(i, j) += a * b;
    g(j, i) += a * b;
  }
  return g;
}

// ---- normalized operators --------------------------------------------------

NormalizedOperators normalized_operators(const Graph& g) {
  const std::size_t n = g.num_nodes();
  const auto edges = g.edges();
  NormalizedOperators ops;
  ops.degrees.assign(n, 1.0);
  for (const Edge& e : edges) {
    const double w2 = e.weight * e.weight;
    ops.degrees[e.source] += w2;
    ops.degrees[e.target] += w2;
  }
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(ops.degrees[i]);

  std::vector<double> a_off(edges.size()), l_off(edges.size());
  std::vector<double> a_diag(n), l_diag(n);
  for (std::size_t l = 0; l < edges.size(); ++l) {
    const Edge& e = edges[l];
    a_off[l] = e.weight * e.weight * inv_sqrt[e.source] * inv_sqrt[e.target];
    l_off[l] = -a_off[l];
  }
  for (std::size_t i = 0; i < n; ++i) {
    a_diag[i] = 1.0 / ops.degrees[i];
    l_diag[i] = 1.0 - a_diag[i];
  }
  ops.a_tilde = symmetric_csr(n, edges, a_off, a_diag);
  ops.l_tilde = symmetric_csr(n, edges, l_off, l_diag);

  std::vector<std::size_t> tails(edges.size()), heads(edges.size());
  std::vector<double> tail_coefs(edges.size()), head_coefs(edges.size());
  for (std::size_t l = 0; l < edges.size(); ++l) {
    const Edge& e = edges[l];
    tails[l] = e.source;
    heads[l] = e.target;
    tail_coefs[l] = -e.weight * inv_sqrt[e.source];
    head_coefs[l] = e.weight * inv_sqrt[e.target];
  }
  ops.delta_tilde = IncidenceMatrix(n, std::move(tails), std::move(heads), std::move(tail_coefs), std::move(head_coefs));
  return ops;
}

// ---- spectral norm ---------------------------------------------------------

double spectral_norm(const CsrMatrix& m, double tol, std::size_t max_iterations) {
  if (m.rows() != m.cols()) throw InputError("spectral_norm: matrix must be square");
  const std::size_t n = m.rows();
  if (n == 0) return 0.0;

  // Deterministic start vector with no special structure (splitmix64 stream).
  Matrix v(n, 1);
  std::uint64_t state = 0x853C49E6748FEA9BULL;
  for (std::size_t i = 0; i < n; ++i) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    v(i, 0) = 0.5 + static_cast<double>(z >> 11) * 0x1.0p-53;
  }
  double norm = frobenius_norm(v);
  for (auto& x : v.values()) x /= norm;

  double estimate = 0.0;
  Matrix w(n, 1);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    w.fill(0.0);
    m.multiply_add(1.0, v, w);
    const double next = frobenius_norm(w);
    if (!std::isfinite(next)) throw NumericError("spectral_norm: non-finite iterate", estimate);
    if (next == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) v(i, 0) = w(i, 0) / next;
    if (it > 0 && std::fabs(next - estimate) <= tol * next) return next;
    estimate = next;
  }
  throw NumericError("spectral_norm: power iteration did not converge in " + std::to_string(max_iterations) +
                         " iterations",
                     estimate);
}

// ---- edge-list files -------------------------------------------------------

EdgeList parse_edge_list(std::istream& in, std::optional<std::size_t> num_nodes, std::string_view source_name) {
  EdgeList list;
  std::size_t max_index = 0;
  bool any = false;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    return InputError(std::string(source_name) + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view content(line);
    if (const auto hash = content.find('#'); hash != std::string_view::npos) content = content.substr(0, hash);

    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < content.size()) {
      const auto start = content.find_first_not_of(" \t\r,", pos);
      if (start == std::string_view::npos) break;
      const auto end = content.find_first_of(" \t\r,", start);
      fields.push_back(content.substr(start, end == std::string_view::npos ? content.npos : end - start));
      pos = end == std::string_view::npos ? content.size() : end;
    }
    if (fields.empty()) continue;
    if (fields.size() != 2 && fields.size() != 3) throw fail("expected 'i j [w]'");

    Edge e;
    for (int k = 0; k < 2; ++k) {
      std::size_t& idx = k == 0 ? e.source : e.target;
      const auto f = fields[static_cast<std::size_t>(k)];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), idx);
      if (ec != std::errc{} || ptr != f.data() + f.size()) throw fail("invalid node index '" + std::string(f) + "'");
    }
    if (fields.size() == 3) {
      const auto f = fields[2];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), e.weight);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(e.weight) || e.weight <= 0.0)
        throw fail("invalid edge weight '" + std::string(f) + "'");
    }
    if (num_nodes && (e.source >= *num_nodes || e.target >= *num_nodes))
      throw fail("node index out of range [0, " + std::to_string(*num_nodes) + ")");
    max_index = std::max({max_index, e.source, e.target});
    any = true;
    list.edges.push_back(e);
  }
  list.num_nodes = num_nodes ? *num_nodes : (any ? max_index + 1 : 0);
  return list;
}

EdgeList read_edge_list(const std::filesystem::path& path, std::optional<std::size_t> num_nodes) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open edge list '" + path.string() + "'");
  return parse_edge_list(in, num_nodes, path.string());
}

Graph load_graph(const std::filesystem::path& path, std::optional<std::size_t> num_nodes) {
  const EdgeList list = read_edge_list(path, num_nodes);
  return build_graph(list.edges, list.num_nodes);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  char buf[64];
  for (const Edge& e : g.edges()) {
    out << e.source << ' ' << e.target;
    if (g.weighted()) {
      const auto res = std::to_chars(buf, buf + sizeof buf, e.weight);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

}  // namespace egnn
