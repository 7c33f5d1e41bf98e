#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "egnn/graph.hpp"
#include "egnn/matrix.hpp"

namespace egnn {

using Mask = std::vector<std::uint8_t>;

struct Dataset {
  std::string name;
  Graph graph;
  Matrix features;  // n x d_in
  std::vector<int> labels;
  std::size_t num_classes = 0;
  Mask train_mask;
  Mask val_mask;
  Mask test_mask;

  std::size_t num_nodes() const { return labels.size(); }
  /// Throws InputError when shapes disagree, masks overlap, labels are out
  /// of range or features are non-finite.
  void validate() const;
};

std::size_t mask_count(const Mask& mask);

enum class SplitProtocol {
  PerClass,      // 20 per class train, 500 validation, 1000 test
  RandomFraction // 10% / 10% / 80%
};

struct LoadOptions {
  /// Use the n x n identity as features; features.csv is not read.
  bool identity_features = false;
  /// Split used when masks.csv is absent.
  SplitProtocol split = SplitProtocol::PerClass;
  std::uint64_t split_seed = 0;
  /// Restrict to the largest connected component before splitting.
  bool largest_component = false;
  /// Scale each feature row to unit l1 norm (rows of zeros are left alone).
  bool row_normalize = false;
};

/// Reads `edges.txt`, `labels.csv`, `features.csv` (unless identity features
/// are requested) and the optional `masks.csv` from `dir`.
Dataset load_dataset(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Writes the four files read by load_dataset.
void write_dataset(const Dataset& data, const std::filesystem::path& dir);

/// Per-class split: `per_class` training nodes per class (or all of a class
/// when it is smaller), then `num_val` and `num_test` from the remainder,
/// capped by what is left.
void assign_per_class_split(Dataset& data, std::uint64_t seed, std::size_t per_class = 20, std::size_t num_val = 500,
                            std::size_t num_test = 1000);
/// Random 10/10/80 split; every class gets at least one training node when
/// it has at least one member.
void assign_fraction_split(Dataset& data, std::uint64_t seed, double train_fraction = 0.1, double val_fraction = 0.1);

/// Restriction to the largest connected component (ties: the component
/// containing the smallest node index); nodes are renumbered in order.
Dataset largest_connected_component(const Dataset& data);

struct SyntheticSpec {
  std::size_t clusters = 2;
  std::size_t nodes_per_cluster = 50;
  double p_in = 0.2;
  double p_out = 0.02;
  double signal_gap = 1.0;
  double noise_sd = 0.1;
  std::uint64_t seed = 0;
  /// Feature dimension; 0 means one dimension per cluster.
  std::size_t feature_dims = 0;
  /// Multiply each feature row by sqrt(d_i) (degree with self-loop) so that
  /// noiseless features are piecewise constant after degree normalization.
  bool degree_scaled = true;

  void validate() const;
};

/// Stochastic block model with labels = cluster id. Cluster c has mean
/// signal_gap * e_(c mod dims); Gaussian noise with sd noise_sd is added.
/// Masks follow the 10/10/80 fractional split seeded by `seed`.
Dataset generate_synthetic(const SyntheticSpec& spec);

struct PerturbedDataset {
  Dataset data;
  std::size_t changed_edges = 0;     // |E_base symmetric-difference E_new|
  double perturbation_rate = 0.0;    // changed_edges / |E_base|
};

/// Replaces the graph of `base` with the edge list at `edges_path`.
PerturbedDataset load_perturbed_edges(const Dataset& base, const std::filesystem::path& edges_path);

std::size_t edge_symmetric_difference(const Graph& a, const Graph& b);

}  // namespace egnn
