#pragma once

// Random instance generators shared by unit, property and acceptance tests.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "egnn/graph.hpp"
#include "egnn/matrix.hpp"

namespace egnn::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double sd = 1.0) {
  std::normal_distribution<double> dist(0.0, sd);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

/// Erdos-Renyi graph with at least one edge; optionally random weights in
/// [0.5, 2].
inline Graph random_graph(Rng& rng, std::size_t n, double p, bool weighted = false) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (uniform(rng, 0.0, 1.0) < p) edges.push_back({i, j, weighted ? uniform(rng, 0.5, 2.0) : 1.0});
  if (edges.empty() && n > 1) edges.push_back({0, n - 1, 1.0});
  return build_graph(edges, n);
}

}  // namespace egnn::testing
