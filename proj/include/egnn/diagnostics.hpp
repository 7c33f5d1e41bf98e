#pragma once

// Edge-difference statistics of a propagated signal F, from the l2 norms of
// the rows of (Delta F). An edge is "wrong" when its endpoints carry
// different labels.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "egnn/graph.hpp"
#include "egnn/matrix.hpp"

namespace egnn {

inline constexpr double kDefaultSparsityThreshold = 0.1;

/// ||(Delta F)_l||_2 for every edge l.
std::vector<double> edge_difference_norms(const Matrix& f, const NormalizedOperators& ops);

struct EdgeDiagnostics {
  std::size_t correct_edges = 0;
  std::size_t wrong_edges = 0;
  double mean_correct = 0.0;  // mean norm over correct edges (NaN when none)
  double mean_wrong = 0.0;    // mean norm over wrong edges (NaN when none)
  /// mean_wrong / mean_correct; NaN when either class of edges is empty or
  /// mean_correct is zero.
  double smoothness_ratio = 0.0;
  double threshold = kDefaultSparsityThreshold;
  /// Fraction of all edges with norm below the threshold (NaN without edges).
  double sparsity_ratio = 0.0;
  std::size_t sparse_correct = 0;  // correct edges below the threshold
  std::size_t sparse_wrong = 0;
};

EdgeDiagnostics edge_diagnostics(const Matrix& f, const NormalizedOperators& ops, std::span<const int> labels,
                                 double threshold = kDefaultSparsityThreshold);

/// JSON object; NaN ratios are written as the string "undef".
std::string to_json(const EdgeDiagnostics& d);

}  // namespace egnn
