#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

namespace ggrf {

using NodeId = std::uint32_t;
using DenseMatrix = Eigen::MatrixXd;

struct Edge {
  NodeId target;
  double weight;
};

using WeightedEdge = std::tuple<NodeId, NodeId, double>;

/// Sparse weighted directed graph stored as CSR out-neighbour lists.
///
/// Immutable after construction. Out-edges of each node are sorted by target id.
/// `degree(i)` is the unweighted out-degree used by the walk sampler,
/// `weighted_degree(i)` the row sum of weights used for normalisation.
class Graph {
 public:
  Graph() = default;

  /// Throws InvalidArgument on out-of-range ids, non-finite weights or
  /// duplicate (source, target) pairs. With `directed == false` every edge
  /// is materialised in both directions (self-loops once).
  static Graph from_edges(std::size_t num_nodes, std::span<const WeightedEdge> edges,
                          bool directed);

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  std::span<const Edge> out_edges(NodeId node) const {
    return {edges_.data() + offsets_[node], edges_.data() + offsets_[node + 1]};
  }
  std::size_t degree(NodeId node) const { return offsets_[node + 1] - offsets_[node]; }
  double weighted_degree(NodeId node) const { return weighted_degree_[node]; }

  /// Weight of edge (source, target), 0 if absent.
  double weight(NodeId source, NodeId target) const;

  bool has_negative_weights() const;
  bool is_symmetric(double tol = 0.0) const;

  /// All directed edges in (source, target) order.
  std::vector<WeightedEdge> edge_list() const;

  DenseMatrix to_dense() const;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Edge> edges_;
  std::vector<double> weighted_degree_;
};

/// Parses `<src> <dst> [weight]` lines; `#` starts a comment. Node ids are
/// 0-indexed and the node count is 1 + the largest id (or `min_nodes` if larger).
Graph load_edge_list(std::istream& in, bool directed, std::size_t min_nodes = 0);
Graph load_edge_list_file(const std::filesystem::path& path, bool directed,
                          std::size_t min_nodes = 0);

/// Writes every directed edge as `<src> <dst> <weight>` with round-trip precision.
/// With `undirected_once`, only edges with src <= dst are written.
void write_edge_list(std::ostream& out, const Graph& g, bool undirected_once = false);

/// w_ij / sqrt(d_i d_j) with weighted degrees; nodes of zero weighted degree keep
/// all-zero rows and columns. Requires non-negative weights.
Graph normalized_adjacency(const Graph& g);

/// L = I - W~, kept as the normalised adjacency plus an implicit identity.
class LaplacianOperator {
 public:
  explicit LaplacianOperator(Graph normalized) : normalized_(std::move(normalized)) {}

  const Graph& normalized() const noexcept { return normalized_; }
  std::size_t size() const noexcept { return normalized_.num_nodes(); }

  std::vector<double> apply(std::span<const double> x) const;
  DenseMatrix to_dense() const;

 private:
  Graph normalized_;
};

LaplacianOperator laplacian_as_operator(const Graph& g);

struct SpectralRadiusEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Power iteration on |W| shifted by the identity, started from the normalised
/// all-ones vector. The reported value is the Collatz-Wielandt upper ratio minus
/// the shift, so it bounds the Perron root of |W| (and hence rho(W)) from above.
/// Stops when the upper and lower ratios agree to `tol`, or when the
/// geometrically extrapolated remaining change drops below it.
SpectralRadiusEstimate spectral_radius(const Graph& g, double tol = 1e-10,
                                       std::size_t max_iters = 100000);

}  // namespace ggrf
