#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "egnn/matrix.hpp"

namespace egnn {

/// Undirected edge. After graph construction `source < target` always holds;
/// `weight` enters the incidence row, so the adjacency entry is weight^2.
struct Edge {
  std::size_t source = 0;
  std::size_t target = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Compressed sparse row matrix with sorted column indices per row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr, std::vector<std::size_t> col_idx,
            std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  /// Entry (i, j), zero when not stored. Binary search within the row.
  double at(std::size_t i, std::size_t j) const;

  /// y += alpha * M x. Each output row is accumulated in stored column order.
  void multiply_add(double alpha, const Matrix& x, Matrix& y) const;
  Matrix multiply(const Matrix& x) const;

  Matrix to_dense() const;
  bool is_symmetric(double tol = 0.0) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

/// Simple undirected graph: no self-loops, no duplicate edges, edges sorted
/// lexicographically with source < target.
class Graph {
 public:
  Graph() = default;

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  /// Symmetric adjacency with entries weight^2 (1 for unweighted graphs).
  const CsrMatrix& adjacency() const { return adjacency_; }
  bool weighted() const { return weighted_; }

  friend Graph build_graph(std::span<const Edge> edge_list, std::size_t n);

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  CsrMatrix adjacency_;
  bool weighted_ = false;
};

/// Deduplicates (first occurrence wins), strips self-loops and orients every
/// edge as (min, max). Throws InputError for n == 0, an out-of-range index or
/// a non-positive or non-finite weight.
Graph build_graph(std::span<const Edge> edge_list, std::size_t n);

/// Edge-row operator: row l of the normalized incidence matrix for edge
/// (i, j) holds -w/sqrt(d_i) at column i and +w/sqrt(d_j) at column j.
/// A node-major index of incident edges makes the transpose product a
/// per-node gather with a fixed summation order (ascending edge index).
class IncidenceMatrix {
 public:
  IncidenceMatrix() = default;
  IncidenceMatrix(std::size_t num_nodes, std::vector<std::size_t> tails, std::vector<std::size_t> heads,
                  std::vector<double> tail_coefs, std::vector<double> head_coefs);

  std::size_t rows() const { return tails_.size(); }
  std::size_t cols() const { return n_; }
  std::size_t tail(std::size_t edge) const { return tails_[edge]; }
  std::size_t head(std::size_t edge) const { return heads_[edge]; }
  double tail_coef(std::size_t edge) const { return tail_coefs_[edge]; }
  double head_coef(std::size_t edge) const { return head_coefs_[edge]; }

  /// out = Delta f  (m x d); out is resized.
  void apply(const Matrix& f, Matrix& out) const;
  /// out += alpha * Delta f
  void apply_add(double alpha, const Matrix& f, Matrix& out) const;
  /// out = Delta^T z  (n x d); out is resized.
  void apply_transpose(const Matrix& z, Matrix& out) const;
  /// out += alpha * Delta^T z
  void apply_transpose_add(double alpha, const Matrix& z, Matrix& out) const;

  /// Copy with the orientation of one edge row reversed (row negated).
  IncidenceMatrix flipped(std::size_t edge) const;

  Matrix to_dense() const;

 private:
  void build_node_index();

  std::size_t n_ = 0;
  std::vector<std::size_t> tails_;
  std::vector<std::size_t> heads_;
  std::vector<double> tail_coefs_;
  std::vector<double> head_coefs_;
  // node -> (edge, coefficient) pairs, ascending edge order
  std::vector<std::size_t> node_ptr_{0};
  std::vector<std::size_t> node_edges_;
  std::vector<double> node_coefs_;
};

/// The degree-normalized operators consumed by the solver and the trainer.
/// Immutable after construction; safe to share between concurrent readers.
struct NormalizedOperators {
  CsrMatrix a_tilde;            // D^-1/2 (A + I) D^-1/2
  CsrMatrix l_tilde;            // I - a_tilde
  IncidenceMatrix delta_tilde;  // Delta D^-1/2, m x n
  std::vector<double> degrees;  // d_i = 1 + sum_j A_ij

  std::size_t num_nodes() const { return degrees.size(); }
  std::size_t num_edges() const { return delta_tilde.rows(); }
};

NormalizedOperators normalized_operators(const Graph& g);

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration. Stops when successive estimates agree within relative `tol`.
/// Throws NumericError (carrying the last estimate) after `max_iterations`.
double spectral_norm(const CsrMatrix& m, double tol = 1e-10, std::size_t max_iterations = 200000);

/// Dense Delta^T Delta, for identity checks.
Matrix incidence_gram(const IncidenceMatrix& delta);

// ---- edge-list files -------------------------------------------------------

/// Edges as read from a file, before graph construction.
struct EdgeList {
  std::vector<Edge> edges;
  std::size_t num_nodes = 0;
};

/// One edge per line: `i j [w]`, whitespace separated, `#` starts a comment.
/// Node count is `num_nodes` when given, otherwise max index + 1.
EdgeList parse_edge_list(std::istream& in, std::optional<std::size_t> num_nodes, std::string_view source_name);
EdgeList read_edge_list(const std::filesystem::path& path, std::optional<std::size_t> num_nodes = std::nullopt);
Graph load_graph(const std::filesystem::path& path, std::optional<std::size_t> num_nodes = std::nullopt);
void write_edge_list(std::ostream& out, const Graph& g);

}  // namespace egnn
