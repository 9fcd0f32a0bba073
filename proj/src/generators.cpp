#include "ggrf/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "ggrf/errors.hpp"
#include "ggrf/rng.hpp"

namespace ggrf {

Graph erdos_renyi(std::size_t num_nodes, double p_edge, std::uint64_t seed) {
  if (num_nodes == 0) throw InvalidArgument("erdos_renyi: num_nodes must be positive");
  if (!(p_edge >= 0.0 && p_edge <= 1.0)) throw InvalidArgument("erdos_renyi: p_edge outside [0, 1]");
  StreamRng rng(seed);
  std::vector<WeightedEdge> edges;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    for (std::size_t j = i + 1; j < num_nodes; ++j) {
      if (rng.uniform() < p_edge) {
        edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j), 1.0);
      }
    }
  }
  return Graph::from_edges(num_nodes, edges, /*directed=*/false);
}

Graph binary_tree(std::size_t num_nodes) {
  if (num_nodes == 0) throw InvalidArgument("binary_tree: num_nodes must be positive");
  std::vector<WeightedEdge> edges;
  for (std::size_t i = 1; i < num_nodes; ++i) {
    edges.emplace_back(static_cast<NodeId>((i - 1) / 2), static_cast<NodeId>(i), 1.0);
  }
  return Graph::from_edges(num_nodes, edges, /*directed=*/false);
}

Graph random_regular(std::size_t num_nodes, std::size_t degree, std::uint64_t seed) {
  if (degree >= num_nodes || (num_nodes * degree) % 2 != 0) {
    throw InvalidArgument("random_regular: need degree < num_nodes and num_nodes * degree even");
  }
  // Steger-Wormald: pair random free stubs, refusing loops and repeated edges,
  // and restart when the remaining stubs cannot be paired.
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    StreamRng rng(derive_seed(seed, attempt));
    std::vector<NodeId> stubs;
    stubs.reserve(num_nodes * degree);
    for (std::size_t i = 0; i < num_nodes; ++i) {
      for (std::size_t k = 0; k < degree; ++k) stubs.push_back(static_cast<NodeId>(i));
    }
    std::set<std::pair<NodeId, NodeId>> seen;
    std::size_t misses = 0;
    while (!stubs.empty() && misses < 64 * stubs.size()) {
      const auto i = static_cast<std::size_t>(rng.below(stubs.size()));
      auto j = static_cast<std::size_t>(rng.below(stubs.size() - 1));
      if (j >= i) ++j;
      auto a = stubs[i];
      auto b = stubs[j];
      if (b < a) std::swap(a, b);
      if (a == b || seen.contains({a, b})) {
        ++misses;
        continue;
      }
      seen.insert({a, b});
      for (const std::size_t k : {std::max(i, j), std::min(i, j)}) {
        stubs[k] = stubs.back();
        stubs.pop_back();
      }
      misses = 0;
    }
    if (!stubs.empty()) continue;
    std::vector<WeightedEdge> edges;
    edges.reserve(seen.size());
    for (const auto& [a, b] : seen) edges.emplace_back(a, b, 1.0);
    return Graph::from_edges(num_nodes, edges, /*directed=*/false);
  }
  throw NumericalError("random_regular: could not pair the stubs into a simple graph");
}

namespace {

std::vector<WeightedEdge> lattice_edges(std::size_t rows, std::size_t cols, bool wrap) {
  auto id = [cols](std::size_t r, std::size_t c) { return static_cast<NodeId>(r * cols + c); };
  std::vector<WeightedEdge> edges;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const bool right = wrap || c + 1 < cols;
      const bool down = wrap || r + 1 < rows;
      const std::size_t c1 = (c + 1) % cols;
      const std::size_t r1 = (r + 1) % rows;
      if (right) edges.emplace_back(id(r, c), id(r, c1), 1.0);
      if (down) edges.emplace_back(id(r, c), id(r1, c), 1.0);
      if (right && down) edges.emplace_back(id(r, c), id(r1, c1), 1.0);
    }
  }
  return edges;
}

}  // namespace

Graph triangulated_grid(std::size_t rows, std::size_t cols) {
  if (rows < 2 || cols < 2) throw InvalidArgument("triangulated_grid: need at least 2x2 nodes");
  const auto edges = lattice_edges(rows, cols, false);
  return Graph::from_edges(rows * cols, edges, /*directed=*/false);
}

Mesh wavy_grid_mesh(std::size_t rows, std::size_t cols, double amplitude, double frequency) {
  Mesh mesh{triangulated_grid(rows, cols), DenseMatrix(rows * cols, 3),
            DenseMatrix(rows * cols, 3)};
  const double k = 2.0 * std::numbers::pi * frequency;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double u = static_cast<double>(c) / static_cast<double>(cols - 1);
      const double v = static_cast<double>(r) / static_cast<double>(rows - 1);
      const double h = amplitude * std::sin(k * u) * std::cos(k * v);
      const double hu = amplitude * k * std::cos(k * u) * std::cos(k * v);
      const double hv = -amplitude * k * std::sin(k * u) * std::sin(k * v);
      const Eigen::Index i = static_cast<Eigen::Index>(r * cols + c);
      mesh.positions.row(i) << u, v, h;
      Eigen::Vector3d n(-hu, -hv, 1.0);
      mesh.normals.row(i) = n.normalized().transpose();
    }
  }
  return mesh;
}

Mesh torus_mesh(std::size_t major_segments, std::size_t minor_segments, double major_radius,
                double minor_radius) {
  if (major_segments < 3 || minor_segments < 3) {
    throw InvalidArgument("torus_mesh: need at least 3 segments in each direction");
  }
  const std::size_t n = major_segments * minor_segments;
  const auto edges = lattice_edges(major_segments, minor_segments, true);
  Mesh mesh{Graph::from_edges(n, edges, /*directed=*/false), DenseMatrix(n, 3), DenseMatrix(n, 3)};
  for (std::size_t a = 0; a < major_segments; ++a) {
    const double u = 2.0 * std::numbers::pi * static_cast<double>(a) / major_segments;
    for (std::size_t b = 0; b < minor_segments; ++b) {
      const double v = 2.0 * std::numbers::pi * static_cast<double>(b) / minor_segments;
      const Eigen::Index i = static_cast<Eigen::Index>(a * minor_segments + b);
      const double ring = major_radius + minor_radius * std::cos(v);
      mesh.positions.row(i) << ring * std::cos(u), ring * std::sin(u), minor_radius * std::sin(v);
      mesh.normals.row(i) << std::cos(v) * std::cos(u), std::cos(v) * std::sin(u), std::sin(v);
    }
  }
  return mesh;
}

}  // namespace ggrf
