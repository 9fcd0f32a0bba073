#include <cmath>
#include <vector>

#include "doctest.h"
#include "ggrf/errors.hpp"
#include "ggrf/generators.hpp"
#include "ggrf/ode.hpp"

using namespace ggrf;

namespace {

OdeProblem single_node() {
  OdeProblem p;
  p.graph = Graph::from_edges(1, std::vector<WeightedEdge>{}, false);
  p.op = OdeOperator::neg_laplacian;  // W = [-1] for an isolated node
  p.drive = std::vector<double>{1.0};
  p.horizon = 1.0;
  return p;
}

}  // namespace

TEST_SUITE("ode") {

TEST_CASE("zero drive") {
  OdeProblem p;
  p.graph = erdos_renyi(10, 0.3, 1);
  p.drive = std::vector<double>(10, 0.0);
  for (double x : simulate_exact(p, 101)) CHECK(x == 0.0);
  for (double x : simulate_grf(p, {4, 0.3, 5, 1})) CHECK(x == 0.0);
}

TEST_CASE("single node relaxes towards the drive") {
  const OdeProblem p = single_node();
  CHECK(ode_operator_matrix(p)(0, 0) == -1.0);
  CHECK(simulate_exact(p, 2001)[0] == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-6));

  double sum = 0;
  double sum_sq = 0;
  const int runs = 300;
  for (int s = 0; s < runs; ++s) {
    const double x = simulate_grf(p, {8, 0.5, static_cast<std::uint64_t>(s), 1})[0];
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / runs;
  const double se = std::sqrt((sum_sq / runs - mean * mean) / (runs - 1));
  CHECK(std::abs(mean - (1 - std::exp(-1.0))) < 4 * se);
}

TEST_CASE("long horizon reaches the steady state") {
  // W = -2 I + ring adjacency / 2 is stable, so x(t) -> -W^-1 y
  std::vector<WeightedEdge> edges;
  for (NodeId i = 0; i < 6; ++i) {
    edges.emplace_back(i, i, -2.0);
    edges.emplace_back(i, (i + 1) % 6, 0.5);
    edges.emplace_back((i + 1) % 6, i, 0.5);
  }
  OdeProblem p;
  p.graph = Graph::from_edges(6, edges, true);
  p.op = OdeOperator::raw;
  std::vector<double> y(6);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::cos(0.5 * i);
  p.drive = y;
  p.horizon = 30.0;
  const DenseMatrix w = ode_operator_matrix(p);
  const auto x = simulate_exact(p, 30001);
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), 6);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), 6);
  CHECK((w * xv + yv).norm() < 1e-5);
}

TEST_CASE("time series drive interpolates") {
  OdeProblem p;
  p.graph = Graph::from_edges(2, std::vector<WeightedEdge>{{0, 1, 1.0}}, false);
  p.drive = TimeSeriesDrive{{0.0, 1.0}, {{0.0, 2.0}, {1.0, 4.0}}};
  CHECK(p.drive_at(0.5) == std::vector<double>{0.5, 3.0});
  CHECK(p.drive_at(-1.0) == std::vector<double>{0.0, 2.0});
  CHECK(p.drive_at(7.0) == std::vector<double>{1.0, 4.0});
}

TEST_CASE("operator names") {
  for (auto op : {OdeOperator::neg_laplacian, OdeOperator::laplacian, OdeOperator::raw}) {
    CHECK(parse_ode_operator(to_string(op)) == op);
  }
  CHECK_THROWS_AS(parse_ode_operator("nope"), InvalidArgument);
}

}
