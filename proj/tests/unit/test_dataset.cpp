#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "egnn/dataset.hpp"
#include "egnn/error.hpp"
#include "support.hpp"

using namespace egnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("egnn_dataset_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

Dataset line_dataset(std::size_t n, std::size_t classes) {
  Dataset d;
  d.name = "line";
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  d.graph = build_graph(e, n);
  d.features = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    d.labels.push_back(static_cast<int>(i % classes));
    d.features(i, 0) = static_cast<double>(i);
    d.features(i, 1) = 1.0;
  }
  d.num_classes = classes;
  d.train_mask = d.val_mask = d.test_mask = Mask(n, 0);
  return d;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("write and load round trip") {
    Dataset d = generate_synthetic(SyntheticSpec{});
    const fs::path dir = scratch_dir("roundtrip");
    write_dataset(d, dir);
    const Dataset back = load_dataset(dir);
    CHECK(back.labels == d.labels);
    CHECK(back.num_classes == d.num_classes);
    CHECK(back.train_mask == d.train_mask);
    CHECK(back.val_mask == d.val_mask);
    CHECK(back.test_mask == d.test_mask);
    CHECK(back.features == d.features);
    CHECK(edge_symmetric_difference(back.graph, d.graph) == 0);
  }

  TEST_CASE("identity features and row normalization") {
    Dataset d = line_dataset(6, 2);
    const fs::path dir = scratch_dir("identity");
    write_dataset(d, dir);
    fs::remove(dir / "features.csv");
    LoadOptions opt;
    CHECK_THROWS_AS(load_dataset(dir, opt), InputError);
    opt.identity_features = true;
    CHECK(load_dataset(dir, opt).features == Matrix::identity(6));

    write_dataset(d, dir);
    opt = {};
    opt.row_normalize = true;
    const Dataset norm = load_dataset(dir, opt);
    CHECK(norm.features(0, 0) == 0.0);
    CHECK(norm.features(0, 1) == 1.0);
    CHECK(norm.features(3, 0) == doctest::Approx(0.75));
    CHECK(norm.features(3, 1) == doctest::Approx(0.25));
  }

  TEST_CASE("per-class split sizes") {
    Dataset d = line_dataset(2000, 7);
    assign_per_class_split(d, 3);
    CHECK(mask_count(d.train_mask) == 140);
    CHECK(mask_count(d.val_mask) == 500);
    CHECK(mask_count(d.test_mask) == 1000);
    std::vector<int> per(7, 0);
    for (std::size_t i = 0; i < d.num_nodes(); ++i)
      if (d.train_mask[i]) ++per[d.labels[i]];
    for (int c : per) CHECK(c == 20);
    CHECK_NOTHROW(d.validate());

    Dataset small = line_dataset(50, 2);
    assign_per_class_split(small, 3);
    CHECK(mask_count(small.train_mask) == 40);
    CHECK(mask_count(small.val_mask) == 10);
    CHECK(mask_count(small.test_mask) == 0);

    Dataset again = line_dataset(2000, 7);
    assign_per_class_split(again, 3);
    CHECK(again.train_mask == d.train_mask);
  }

  TEST_CASE("fraction split") {
    Dataset d = line_dataset(1000, 5);
    assign_fraction_split(d, 1);
    CHECK(mask_count(d.train_mask) == 100);
    CHECK(mask_count(d.val_mask) == 100);
    CHECK(mask_count(d.test_mask) == 800);
    Dataset tiny = line_dataset(8, 4);
    assign_fraction_split(tiny, 1);
    std::set<int> seen;
    for (std::size_t i = 0; i < 8; ++i)
      if (tiny.train_mask[i]) seen.insert(tiny.labels[i]);
    CHECK(seen.size() == 4);
  }

  TEST_CASE("malformed files report file and line") {
    Dataset d = line_dataset(4, 2);
    const fs::path dir = scratch_dir("errors");
    write_dataset(d, dir);
    write_text(dir / "labels.csv", "0\n1\nx\n0\n");
    try {
      load_dataset(dir);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("labels.csv:3") != std::string::npos);
    }
    write_dataset(d, dir);
    write_text(dir / "masks.csv", "1,0,0\n0,2,0\n0,0,1\n0,0,1\n");
    try {
      load_dataset(dir);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("masks.csv:2") != std::string::npos);
    }
    write_dataset(d, dir);
    write_text(dir / "masks.csv", "1,1,0\n0,0,0\n0,0,1\n0,0,1\n");
    CHECK_THROWS_AS(load_dataset(dir), InputError);
    CHECK_THROWS_AS(load_dataset(dir / "missing"), InputError);
  }

  TEST_CASE("masks are generated when absent") {
    Dataset d = line_dataset(100, 2);
    const fs::path dir = scratch_dir("nomasks");
    write_dataset(d, dir);
    fs::remove(dir / "masks.csv");
    LoadOptions opt;
    opt.split = SplitProtocol::RandomFraction;
    const Dataset back = load_dataset(dir, opt);
    CHECK(mask_count(back.train_mask) == 10);
    CHECK(mask_count(back.test_mask) == 80);
  }

  TEST_CASE("synthetic graphs are deterministic") {
    SyntheticSpec s;
    s.seed = 42;
    const Dataset a = generate_synthetic(s);
    const Dataset b = generate_synthetic(s);
    CHECK(a.features == b.features);
    CHECK(a.train_mask == b.train_mask);
    CHECK(edge_symmetric_difference(a.graph, b.graph) == 0);
    s.seed = 43;
    CHECK(generate_synthetic(s).features != a.features);
  }

  TEST_CASE("noiseless synthetic features are piecewise constant after normalization") {
    SyntheticSpec s;
    s.noise_sd = 0.0;
    s.clusters = 3;
    const Dataset d = generate_synthetic(s);
    const NormalizedOperators ops = normalized_operators(d.graph);
    for (std::size_t i = 0; i < d.num_nodes(); ++i) {
      const double root = std::sqrt(ops.degrees[i]);
      for (std::size_t j = 0; j < 3; ++j) {
        const double expected = (static_cast<std::size_t>(d.labels[i]) == j) ? 1.0 : 0.0;
        CHECK(d.features(i, j) / root == doctest::Approx(expected).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("disconnected clusters without noise or scaling") {
    SyntheticSpec s;
    s.p_out = 0.0;
    s.noise_sd = 0.0;
    s.degree_scaled = false;
    const Dataset d = generate_synthetic(s);
    for (const Edge& e : d.graph.edges()) CHECK(d.labels[e.source] == d.labels[e.target]);
    for (std::size_t i = 0; i < d.num_nodes(); ++i)
      CHECK(d.features(i, static_cast<std::size_t>(d.labels[i])) == 1.0);
  }

  TEST_CASE("inter-cluster edge count matches its expectation") {
    SyntheticSpec s;
    s.clusters = 2;
    s.nodes_per_cluster = 200;
    s.p_in = 0.1;
    s.p_out = 0.02;
    double total = 0.0;
    const int reps = 10;
    for (int r = 0; r < reps; ++r) {
      s.seed = r;
      const Dataset d = generate_synthetic(s);
      for (const Edge& e : d.graph.edges()) total += (d.labels[e.source] != d.labels[e.target]);
    }
    const double expected = 200.0 * 200.0 * 0.02;
    CHECK(total / reps == doctest::Approx(expected).epsilon(0.05));
    s.p_out = 0.3;
    CHECK_THROWS_AS(generate_synthetic(s), InputError);
  }

  TEST_CASE("perturbed edge lists") {
    Dataset d = line_dataset(21, 2);
    const fs::path dir = scratch_dir("perturbed");
    write_text(dir / "same.txt", [&] {
      std::string s;
      for (const Edge& e : d.graph.edges()) s += std::to_string(e.source) + " " + std::to_string(e.target) + "\n";
      return s;
    }());
    const PerturbedDataset same = load_perturbed_edges(d, dir / "same.txt");
    CHECK(same.changed_edges == 0);
    CHECK(same.perturbation_rate == 0.0);
    std::string text;
    for (const Edge& e : d.graph.edges())
      if (e.source != 0) text += std::to_string(e.source) + " " + std::to_string(e.target) + "\n";
    text += "0 5\n";
    write_text(dir / "ptb.txt", text);
    const PerturbedDataset p = load_perturbed_edges(d, dir / "ptb.txt");
    CHECK(p.changed_edges == 2);
    CHECK(p.perturbation_rate == doctest::Approx(0.1));
    CHECK(p.data.labels == d.labels);
    CHECK(p.data.name == "line@ptb");
  }

  TEST_CASE("largest connected component") {
    Dataset d = line_dataset(6, 2);
    const std::vector<Edge> e{{0, 1}, {2, 3}, {3, 4}, {4, 5}};
    d.graph = build_graph(e, 6);
    d.train_mask[3] = 1;
    const Dataset lcc = largest_connected_component(d);
    CHECK(lcc.num_nodes() == 4);
    CHECK(lcc.graph.num_edges() == 3);
    CHECK(lcc.features(0, 0) == 2.0);
    CHECK(lcc.train_mask[1] == 1);
    CHECK(lcc.labels == std::vector<int>{0, 1, 0, 1});
  }
}
