#include "egnn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "egnn/error.hpp"

namespace egnn {

namespace fs = std::filesystem;

std::size_t mask_count(const Mask& mask) {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

void Dataset::validate() const {
  const std::size_t n = labels.size();
  if (n == 0) throw InputError("dataset '" + name + "': no nodes");
  if (graph.num_nodes() != n)
    throw InputError("dataset '" + name + "': graph has " + std::to_string(graph.num_nodes()) + " nodes, labels " +
                     std::to_string(n));
  if (features.rows() != n)
    throw InputError("dataset '" + name + "': features have " + std::to_string(features.rows()) + " rows, expected " +
                     std::to_string(n));
  if (!features.all_finite()) throw InputError("dataset '" + name + "': non-finite feature values");
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes)
      throw InputError("dataset '" + name + "': label " + std::to_string(labels[i]) + " of node " + std::to_string(i) +
                       " outside [0, " + std::to_string(num_classes) + ")");
  for (const Mask* m : {&train_mask, &val_mask, &test_mask})
    if (m->size() != n) throw InputError("dataset '" + name + "': mask length mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (train_mask[i] + val_mask[i] + test_mask[i] > 1)
      throw InputError("dataset '" + name + "': node " + std::to_string(i) + " is in more than one mask");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

std::vector<int> read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(content.data(), content.data() + content.size(), v);
    if (ec != std::errc{} || ptr != content.data() + content.size() || v < 0)
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": invalid label '" + std::string(content) + "'");
    labels.push_back(v);
  }
  return labels;
}

void read_masks(const fs::path& path, Dataset& data) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  const Matrix flags = read_csv_matrix(in, path.string().c_str());
  if (flags.rows() != data.num_nodes() || flags.cols() != 3)
    throw InputError(path.string() + ": expected " + std::to_string(data.num_nodes()) + " rows of three 0/1 flags");
  data.train_mask.assign(flags.rows(), 0);
  data.val_mask.assign(flags.rows(), 0);
  data.test_mask.assign(flags.rows(), 0);
  for (std::size_t i = 0; i < flags.rows(); ++i) {
    for (std::size_t c = 0; c < 3; ++c)
      if (flags(i, c) != 0.0 && flags(i, c) != 1.0)
        throw InputError(path.string() + ":" + std::to_string(i + 1) + ": mask flags must be 0 or 1");
    data.train_mask[i] = static_cast<std::uint8_t>(flags(i, 0));
    data.val_mask[i] = static_cast<std::uint8_t>(flags(i, 1));
    data.test_mask[i] = static_cast<std::uint8_t>(flags(i, 2));
  }
}

std::size_t infer_classes(const std::vector<int>& labels) {
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  return static_cast<std::size_t>(max_label + 1);
}

}  // namespace

Dataset load_dataset(const fs::path& dir, const LoadOptions& options) {
  if (!fs::is_directory(dir)) throw InputError("dataset directory '" + dir.string() + "' does not exist");
  Dataset data;
  data.name = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
  data.labels = read_labels(dir / "labels.csv");
  const std::size_t n = data.labels.size();
  if (n == 0) throw InputError(dir.string() + "/labels.csv: no labels");
  data.num_classes = infer_classes(data.labels);
  data.graph = load_graph(dir / "edges.txt", n);

  if (options.identity_features) {
    data.features = Matrix::identity(n);
  } else {
    const fs::path fpath = dir / "features.csv";
    std::ifstream in(fpath);
    if (!in) throw InputError("cannot open '" + fpath.string() + "' (use identity features for featureless graphs)");
    data.features = read_csv_matrix(in, fpath.string().c_str());
    if (data.features.rows() != n)
      throw InputError(fpath.string() + ": " + std::to_string(data.features.rows()) + " rows, expected " +
                       std::to_string(n));
  }
  if (options.row_normalize) {
    for (std::size_t i = 0; i < n; ++i) {
      auto row = data.features.row(i);
      double s = 0.0;
      for (double v : row) s += std::fabs(v);
      if (s > 0.0)
        for (double& v : row) v /= s;
    }
  }

  const bool has_masks = fs::exists(dir / "masks.csv");
  if (has_masks) read_masks(dir / "masks.csv", data);
  else data.train_mask = data.val_mask = data.test_mask = Mask(n, 0);

  if (options.largest_component) data = largest_connected_component(data);
  if (!has_masks) {
    if (options.split == SplitProtocol::PerClass) assign_per_class_split(data, options.split_seed);
    else assign_fraction_split(data, options.split_seed);
  }
  data.validate();
  return data;
}

void write_dataset(const Dataset& data, const fs::path& dir) {
  data.validate();
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "edges.txt");
    out << "# " << data.num_nodes() << " nodes, " << data.graph.num_edges() << " edges\n";
    write_edge_list(out, data.graph);
  }
  {
    std::ofstream out(dir / "features.csv");
    write_csv_matrix(out, data.features);
  }
  {
    std::ofstream out(dir / "labels.csv");
    for (int l : data.labels) out << l << '\n';
  }
  {
    std::ofstream out(dir / "masks.csv");
    for (std::size_t i = 0; i < data.num_nodes(); ++i)
      out << int(data.train_mask[i]) << ',' << int(data.val_mask[i]) << ',' << int(data.test_mask[i]) << '\n';
  }
}

void assign_per_class_split(Dataset& data, std::uint64_t seed, std::size_t per_class, std::size_t num_val,
                            std::size_t num_test) {
  const std::size_t n = data.num_nodes();
  std::mt19937_64 rng(seed);
  data.train_mask.assign(n, 0);
  data.val_mask.assign(n, 0);
  data.test_mask.assign(n, 0);
  std::vector<std::vector<std::size_t>> by_class(data.num_classes);
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t k = 0; k < std::min(per_class, members.size()); ++k) data.train_mask[members[k]] = 1;
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i)
    if (!data.train_mask[i]) rest.push_back(i);
  std::shuffle(rest.begin(), rest.end(), rng);
  const std::size_t nv = std::min(num_val, rest.size());
  const std::size_t nt = std::min(num_test, rest.size() - nv);
  for (std::size_t k = 0; k < nv; ++k) data.val_mask[rest[k]] = 1;
  for (std::size_t k = nv; k < nv + nt; ++k) data.test_mask[rest[k]] = 1;
}

void assign_fraction_split(Dataset& data, std::uint64_t seed, double train_fraction, double val_fraction) {
  const std::size_t n = data.num_nodes();
  std::mt19937_64 rng(seed);
  data.train_mask.assign(n, 0);
  data.val_mask.assign(n, 0);
  data.test_mask.assign(n, 0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
  std::vector<bool> seen(data.num_classes, false);
  std::size_t train = 0;
  for (std::size_t i : order) {
    const auto c = static_cast<std::size_t>(data.labels[i]);
    if (!seen[c]) {
      seen[c] = true;
      data.train_mask[i] = 1;
      ++train;
    }
  }
  std::size_t val = 0;
  for (std::size_t i : order) {
    if (data.train_mask[i]) continue;
    if (train < n_train) {
      data.train_mask[i] = 1;
      ++train;
    } else if (val < n_val) {
      data.val_mask[i] = 1;
      ++val;
    } else {
      data.test_mask[i] = 1;
    }
  }
}

Dataset largest_connected_component(const Dataset& data) {
  const std::size_t n = data.num_nodes();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const Edge& e : data.graph.edges()) parent[find(e.source)] = find(e.target);
  std::vector<std::size_t> size(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++size[find(i)];
  std::size_t best_root = find(0);
  for (std::size_t i = 0; i < n; ++i)
    if (size[find(i)] > size[best_root]) best_root = find(i);

  std::vector<std::size_t> new_index(n, n);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (find(i) == best_root) new_index[i] = kept++;

  Dataset out;
  out.name = data.name;
  out.num_classes = data.num_classes;
  out.features = Matrix(kept, data.features.cols());
  for (std::size_t i = 0; i < n; ++i) {
    if (new_index[i] == n) continue;
    const std::size_t k = new_index[i];
    std::copy(data.features.row(i).begin(), data.features.row(i).end(), out.features.row(k).begin());
    out.labels.push_back(data.labels[i]);
    out.train_mask.push_back(data.train_mask[i]);
    out.val_mask.push_back(data.val_mask[i]);
    out.test_mask.push_back(data.test_mask[i]);
  }
  std::vector<Edge> edges;
  for (const Edge& e : data.graph.edges())
    if (new_index[e.source] != n) edges.push_back(Edge{new_index[e.source], new_index[e.target], e.weight});
  out.graph = build_graph(edges, kept);
  return out;
}

void SyntheticSpec::validate() const {
  if (clusters == 0 || nodes_per_cluster == 0) throw InputError("SyntheticSpec: need at least one cluster and node");
  if (!(p_out >= 0.0 && p_out < p_in && p_in <= 1.0)) throw InputError("SyntheticSpec: require 0 <= p_out < p_in <= 1");
  if (!(noise_sd >= 0.0) || !std::isfinite(signal_gap)) throw InputError("SyntheticSpec: invalid noise or gap");
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n = spec.clusters * spec.nodes_per_cluster;
  const std::size_t dims = spec.feature_dims == 0 ? spec.clusters : spec.feature_dims;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset data;
  data.name = "synthetic";
  data.num_classes = spec.clusters;
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) data.labels[i] = static_cast<int>(i / spec.nodes_per_cluster);

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = data.labels[i] == data.labels[j] ? spec.p_in : spec.p_out;
      if (coin(rng) < p) edges.push_back(Edge{i, j, 1.0});
    }
  data.graph = build_graph(edges, n);

  std::vector<double> degree(n, 1.0);
  for (const Edge& e : data.graph.edges()) {
    degree[e.source] += 1.0;
    degree[e.target] += 1.0;
  }
  data.features = Matrix(n, dims);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(data.labels[i]);
    const double s = spec.degree_scaled ? std::sqrt(degree[i]) : 1.0;
    for (std::size_t k = 0; k < dims; ++k) {
      const double mean = k == c % dims ? spec.signal_gap : 0.0;
      const double eps = spec.noise_sd > 0.0 ? spec.noise_sd * noise(rng) : 0.0;
      data.features(i, k) = s * (mean + eps);
    }
  }
  assign_fraction_split(data, spec.seed ^ 0x5EED5EED5EEDULL);
  data.validate();
  return data;
}

std::size_t edge_symmetric_difference(const Graph& a, const Graph& b) {
  std::set<std::pair<std::size_t, std::size_t>> ea, eb;
  for (const Edge& e : a.edges()) ea.emplace(e.source, e.target);
  for (const Edge& e : b.edges()) eb.emplace(e.source, e.target);
  std::size_t diff = 0;
  for (const auto& e : ea) diff += eb.count(e) == 0 ? 1 : 0;
  for (const auto& e : eb) diff += ea.count(e) == 0 ? 1 : 0;
  return diff;
}

PerturbedDataset load_perturbed_edges(const Dataset& base, const fs::path& edges_path) {
  PerturbedDataset out;
  out.data = base;
  out.data.graph = load_graph(edges_path, base.num_nodes());
  out.data.name = base.name + "@" + edges_path.stem().string();
  out.changed_edges = edge_symmetric_difference(base.graph, out.data.graph);
  const std::size_t m = base.graph.num_edges();
  out.perturbation_rate = m == 0 ? (out.changed_edges == 0 ? 0.0 : 1.0)
                                 : static_cast<double>(out.changed_edges) / static_cast<double>(m);
  return out;
}

}  // namespace egnn
