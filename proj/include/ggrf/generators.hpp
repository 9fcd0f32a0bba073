#pragma once

#include <cstddef>
#include <cstdint>

#include "ggrf/graph.hpp"

namespace ggrf {

/// G(n, p) with unit weights; each of the n(n-1)/2 undirected edges is drawn
/// independently.
Graph erdos_renyi(std::size_t num_nodes, double p_edge, std::uint64_t seed);

/// Complete binary tree with `num_nodes` nodes in heap order (node i has
/// children 2i+1 and 2i+2).
Graph binary_tree(std::size_t num_nodes);

/// Random simple d-regular graph: stubs are paired at random, rejecting loops
/// and repeated edges, with a restart if the last stubs cannot be paired.
/// Asymptotically uniform for fixed degree.
/// Requires num_nodes * degree even and degree < num_nodes.
Graph random_regular(std::size_t num_nodes, std::size_t degree, std::uint64_t seed);

/// Triangulated rows x cols lattice: 4-neighbour grid plus one diagonal per cell.
Graph triangulated_grid(std::size_t rows, std::size_t cols);

/// Triangle mesh with per-node unit normals (rows of `normals`, N x 3).
struct Mesh {
  Graph graph;
  DenseMatrix positions;
  DenseMatrix normals;
};

/// Height field z = amplitude * sin(2 pi f u) * cos(2 pi f v) over the unit
/// square, sampled on a triangulated grid, with analytic surface normals.
Mesh wavy_grid_mesh(std::size_t rows, std::size_t cols, double amplitude = 0.15,
                    double frequency = 1.5);

/// Triangulated torus (major radius R, minor radius r) with analytic normals.
Mesh torus_mesh(std::size_t major_segments, std::size_t minor_segments, double major_radius = 1.0,
                double minor_radius = 0.35);

}  // namespace ggrf
