#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ggrf/errors.hpp"
#include "ggrf/generators.hpp"
#include "ggrf/graph.hpp"

using namespace ggrf;

namespace {

Graph parse(const std::string& text, bool directed) {
  std::istringstream in(text);
  return load_edge_list(in, directed);
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("two-node cycle, directed and symmetrised") {
  const Graph a = parse("0 1 1.0\n1 0 1.0", true);
  const Graph b = parse("0 1", false);
  CHECK(a.num_nodes() == 2);
  CHECK(a.degree(0) == 1);
  CHECK(a.degree(1) == 1);
  CHECK(a.edge_list() == b.edge_list());
}

TEST_CASE("comments, blank lines and weights") {
  const Graph g = parse("# header\n\n0 2 0.5  # trailing\n2 1 3\n", true);
  CHECK(g.num_nodes() == 3);
  CHECK(g.weight(0, 2) == 0.5);
  CHECK(g.weight(2, 1) == 3.0);
  CHECK(g.weight(1, 2) == 0.0);
  CHECK(g.weighted_degree(2) == 3.0);
}

TEST_CASE("malformed input reports the line") {
  try {
    parse("0 1 x", true);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(parse("0 1\n-1 2\n", true), ParseError);
  CHECK_THROWS_AS(parse("0 1 inf\n", true), Error);
  CHECK_THROWS_AS(parse("0 1\n0 1\n", true), Error);
  CHECK_THROWS_AS(parse("0 1 2 3\n", true), ParseError);
}

TEST_CASE("edge list round trip") {
  const Graph g = erdos_renyi(30, 0.2, 4);
  std::ostringstream out;
  write_edge_list(out, g);
  CHECK(parse(out.str(), true).edge_list() == g.edge_list());
  std::ostringstream once;
  write_edge_list(once, g, true);
  CHECK(parse(once.str(), false).edge_list() == g.edge_list());
}

TEST_CASE("normalised adjacency") {
  const Graph pair = normalized_adjacency(parse("0 1", false));
  CHECK(pair.weight(0, 1) == 1.0);
  CHECK(pair.weight(1, 0) == 1.0);

  const Graph tri = normalized_adjacency(parse("0 1\n1 2\n2 0", false));
  for (NodeId i = 0; i < 3; ++i) {
    for (const Edge& e : tri.out_edges(i)) CHECK(e.weight == doctest::Approx(0.5).epsilon(1e-15));
  }

  const Graph iso = normalized_adjacency(
      Graph::from_edges(3, std::vector<WeightedEdge>{{0, 1, 1.0}}, false));
  CHECK(iso.degree(2) == 0);
  const DenseMatrix d = iso.to_dense();
  CHECK(d.row(2).isZero());
  CHECK(d.col(2).isZero());
}

TEST_CASE("regular graph normalises to 1/d") {
  const Graph g = normalized_adjacency(random_regular(40, 4, 9));
  for (NodeId i = 0; i < 40; ++i) {
    CHECK(g.degree(i) == 4);
    for (const Edge& e : g.out_edges(i)) CHECK(e.weight == 0.25);
  }
}

TEST_CASE("laplacian operator") {
  const DenseMatrix l = laplacian_as_operator(parse("0 1", false)).to_dense();
  DenseMatrix want(2, 2);
  want << 1, -1, -1, 1;
  CHECK((l - want).norm() < 1e-15);

  const Graph iso = Graph::from_edges(1, std::vector<WeightedEdge>{}, false);
  CHECK(laplacian_as_operator(iso).to_dense()(0, 0) == 1.0);

  const auto op = laplacian_as_operator(random_regular(20, 3, 1));
  const std::vector<double> ones(20, 1.0);
  for (double v : op.apply(ones)) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("spectral radius") {
  CHECK(spectral_radius(Graph::from_edges(3, std::vector<WeightedEdge>{}, true)).value == 0.0);

  std::vector<WeightedEdge> loops;
  for (NodeId i = 0; i < 4; ++i) loops.emplace_back(i, i, 0.7);
  CHECK(spectral_radius(Graph::from_edges(4, loops, true)).value == doctest::Approx(0.7));

  const auto pair = spectral_radius(normalized_adjacency(parse("0 1", false)));
  CHECK(pair.value == doctest::Approx(1.0).epsilon(1e-9));

  for (std::uint64_t seed : {2u, 3u, 4u}) {
    const auto er = spectral_radius(normalized_adjacency(erdos_renyi(60, 0.1, seed)), 1e-10);
    CHECK(er.converged);
    CHECK(er.value <= 1.0 + 1e-10);
  }
  const auto tree = spectral_radius(normalized_adjacency(binary_tree(31)), 1e-10);
  CHECK(tree.value <= 1.0 + 1e-10);
}

TEST_CASE("generators") {
  const Graph tree = binary_tree(7);
  CHECK(tree.num_edges() == 12);
  CHECK(tree.degree(0) == 2);
  CHECK(tree.degree(1) == 3);
  CHECK(tree.degree(6) == 1);

  const Graph grid = triangulated_grid(3, 4);
  CHECK(grid.num_nodes() == 12);
  // 4-neighbour edges plus one diagonal per cell, both directions
  CHECK(grid.num_edges() == 2 * (3 * 3 + 2 * 4 + 2 * 3));
  CHECK(grid.is_symmetric());

  CHECK(erdos_renyi(25, 0.3, 5).edge_list() == erdos_renyi(25, 0.3, 5).edge_list());
  CHECK_THROWS_AS(random_regular(5, 3, 0), InvalidArgument);

  const Mesh mesh = wavy_grid_mesh(6, 6);
  for (Eigen::Index i = 0; i < mesh.normals.rows(); ++i) {
    CHECK(mesh.normals.row(i).norm() == doctest::Approx(1.0));
  }
}

}
