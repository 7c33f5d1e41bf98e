#include <doctest.h>

#include <cmath>
#include <sstream>

#include "egnn/emp.hpp"
#include "egnn/error.hpp"
#include "egnn/graph.hpp"
#include "support.hpp"

using namespace egnn;
using egnn::testing::Rng;

TEST_SUITE("graph") {
  TEST_CASE("duplicates and self-loops are removed") {
    const std::vector<Edge> in{{0, 1}, {1, 0}, {1, 1}};
    const Graph g = build_graph(in, 2);
    CHECK(g.num_edges() == 1);
    CHECK(g.edges()[0] == Edge{0, 1, 1.0});
  }

  TEST_CASE("empty and path graphs") {
    CHECK(build_graph({}, 3).num_edges() == 0);
    const std::vector<Edge> path{{0, 1}, {2, 1}};
    const Graph g = build_graph(path, 3);
    CHECK(g.num_edges() == 2);
    CHECK(g.edges()[1] == Edge{1, 2, 1.0});
    CHECK(g.adjacency().is_symmetric());
    CHECK(g.adjacency().at(2, 1) == 1.0);
    CHECK(g.adjacency().at(0, 2) == 0.0);
  }

  TEST_CASE("invalid input") {
    CHECK_THROWS_AS(build_graph({}, 0), InputError);
    const std::vector<Edge> out_of_range{{0, 3}};
    CHECK_THROWS_AS(build_graph(out_of_range, 3), InputError);
    const std::vector<Edge> bad_weight{{0, 1, -1.0}};
    CHECK_THROWS_AS(build_graph(bad_weight, 2), InputError);
  }

  TEST_CASE("single edge operators") {
    const std::vector<Edge> e{{0, 1}};
    const NormalizedOperators ops = normalized_operators(build_graph(e, 2));
    CHECK(ops.degrees == std::vector<double>{2.0, 2.0});
    const Matrix delta = ops.delta_tilde.to_dense();
    CHECK(delta.rows() == 1);
    CHECK(delta(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(delta(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    const Matrix l = ops.l_tilde.to_dense();
    CHECK(max_abs_diff(l, Matrix{{0.5, -0.5}, {-0.5, 0.5}}) <= 1e-15);
    CHECK(spectral_norm(ops.l_tilde) == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("edgeless graph operators") {
    const NormalizedOperators ops = normalized_operators(build_graph({}, 2));
    CHECK(ops.a_tilde.to_dense() == Matrix::identity(2));
    CHECK(max_abs_diff(ops.l_tilde.to_dense(), Matrix(2, 2)) == 0.0);
    CHECK(ops.num_edges() == 0);
    CHECK(spectral_norm(ops.l_tilde) == 0.0);
  }

  TEST_CASE("random graphs satisfy the structural identities") {
    Rng rng(5);
    for (int t = 0; t < 30; ++t) {
      const std::size_t n = testing::uniform_index(rng, 2, 40);
      const bool weighted = t % 2 == 1;
      const Graph g = testing::random_graph(rng, n, testing::uniform(rng, 0.05, 0.7), weighted);
      const NormalizedOperators ops = normalized_operators(g);
      CHECK(max_abs_diff(ops.l_tilde.to_dense(), incidence_gram(ops.delta_tilde)) <= 1e-12);
      CHECK(ops.a_tilde.is_symmetric());
      for (double v : ops.a_tilde.values()) CHECK(v >= 0.0);
      for (double d : ops.degrees) CHECK(d >= 1.0);
      const double norm = spectral_norm(ops.l_tilde);
      CHECK(norm >= 0.0);
      CHECK(norm <= 2.0 + 1e-6);
      // two nonzeros per incidence row with the stated signs
      for (std::size_t l = 0; l < ops.num_edges(); ++l) {
        const std::size_t i = ops.delta_tilde.tail(l), j = ops.delta_tilde.head(l);
        CHECK(i < j);
        CHECK(ops.delta_tilde.tail_coef(l) < 0.0);
        CHECK(ops.delta_tilde.head_coef(l) > 0.0);
        if (!weighted) {
          CHECK(ops.delta_tilde.tail_coef(l) == doctest::Approx(-1.0 / std::sqrt(ops.degrees[i])));
          CHECK(ops.delta_tilde.head_coef(l) == doctest::Approx(1.0 / std::sqrt(ops.degrees[j])));
        }
      }
    }
  }

  TEST_CASE("transpose products agree with dense algebra") {
    Rng rng(6);
    const Graph g = testing::random_graph(rng, 15, 0.3);
    const NormalizedOperators ops = normalized_operators(g);
    const Matrix f = testing::random_matrix(rng, 15, 3);
    const Matrix z = testing::random_matrix(rng, ops.num_edges(), 3);
    const Matrix d = ops.delta_tilde.to_dense();
    Matrix df, dtz;
    ops.delta_tilde.apply(f, df);
    ops.delta_tilde.apply_transpose(z, dtz);
    CHECK(max_abs_diff(df, matmul(d, f)) <= 1e-14);
    CHECK(max_abs_diff(dtz, matmul(d.transposed(), z)) <= 1e-14);
    CHECK(max_abs_diff(ops.a_tilde.multiply(f), matmul(ops.a_tilde.to_dense(), f)) <= 1e-14);
  }

  TEST_CASE("edge orientation does not change the gram matrix or the solution") {
    Rng rng(7);
    const Graph g = testing::random_graph(rng, 12, 0.35);
    const NormalizedOperators ops = normalized_operators(g);
    const Matrix x = testing::random_matrix(rng, 12, 2);
    for (std::size_t l = 0; l < ops.num_edges(); l += 3) {
      NormalizedOperators flipped = ops;
      flipped.delta_tilde = ops.delta_tilde.flipped(l);
      CHECK(max_abs_diff(incidence_gram(flipped.delta_tilde), incidence_gram(ops.delta_tilde)) <= 1e-15);
      for (Penalty mode : {Penalty::L1, Penalty::L21}) {
        const EmpConfig cfg = EmpConfig::make(0.8, 1.5, 40, mode);
        const EmpResult a = emp_run(x, ops, cfg);
        const EmpResult b = emp_run(x, flipped, cfg);
        CHECK(max_abs_diff(a.f, b.f) <= 1e-12);
        for (std::size_t c = 0; c < 2; ++c) CHECK(a.z(l, c) == doctest::Approx(-b.z(l, c)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("weights enter the incidence rows") {
    const std::vector<Edge> e{{0, 1, 2.0}};
    const Graph g = build_graph(e, 2);
    CHECK(g.weighted());
    CHECK(g.adjacency().at(0, 1) == 4.0);
    const NormalizedOperators ops = normalized_operators(g);
    CHECK(ops.degrees[0] == 5.0);
    CHECK(ops.delta_tilde.head_coef(0) == doctest::Approx(2.0 / std::sqrt(5.0)));
  }

  TEST_CASE("spectral norm of the zero matrix and failure to converge") {
    const CsrMatrix zero(3, 3, {0, 0, 0, 0}, {}, {});
    CHECK(spectral_norm(zero) == 0.0);
    Rng rng(8);
    const NormalizedOperators ops = normalized_operators(testing::random_graph(rng, 30, 0.2));
    try {
      spectral_norm(ops.l_tilde, 1e-300, 3);
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(e.last_estimate().has_value());
    }
  }

  TEST_CASE("edge list parsing") {
    std::istringstream in("# header\n0 1\n1,2 0.5\n\n2 3  # trailing\n");
    const EdgeList el = parse_edge_list(in, std::nullopt, "mem");
    CHECK(el.num_nodes == 4);
    CHECK(el.edges.size() == 3);
    CHECK(el.edges[1].weight == 0.5);

    std::istringstream bad("0 1\n0 x\n");
    try {
      parse_edge_list(bad, std::nullopt, "edges.txt");
      FAIL("expected an error");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("edges.txt:2") != std::string::npos);
    }
    std::istringstream range("0 5\n");
    CHECK_THROWS_AS(parse_edge_list(range, 3, "edges.txt"), InputError);
  }

  TEST_CASE("edge list round trip") {
    Rng rng(9);
    for (bool weighted : {false, true}) {
      const Graph g = testing::random_graph(rng, 10, 0.4, weighted);
      std::stringstream ss;
      write_edge_list(ss, g);
      const EdgeList el = parse_edge_list(ss, 10, "mem");
      const Graph h = build_graph(el.edges, el.num_nodes);
      REQUIRE(h.num_edges() == g.num_edges());
      for (std::size_t l = 0; l < g.num_edges(); ++l) CHECK(h.edges()[l] == g.edges()[l]);
    }
  }
}
