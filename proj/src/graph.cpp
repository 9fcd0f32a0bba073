#include "ggrf/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

#include "ggrf/errors.hpp"

namespace ggrf {

Graph Graph::from_edges(std::size_t num_nodes, std::span<const WeightedEdge> edges,
                        bool directed) {
  if (num_nodes > std::numeric_limits<NodeId>::max()) {
    throw InvalidArgument("graph too large for 32-bit node ids");
  }
  std::vector<WeightedEdge> all;
  all.reserve(directed ? edges.size() : 2 * edges.size());
  for (const auto& [src, dst, w] : edges) {
    if (src >= num_nodes || dst >= num_nodes) {
      throw InvalidArgument("edge (" + std::to_string(src) + ", " + std::to_string(dst) +
                            ") references a node outside [0, " + std::to_string(num_nodes) +
                            ")");
    }
    if (!std::isfinite(w)) {
      throw InvalidArgument("non-finite weight on edge (" + std::to_string(src) + ", " +
                            std::to_string(dst) + ")");
    }
    all.emplace_back(src, dst, w);
    if (!directed && src != dst) all.emplace_back(dst, src, w);
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  for (std::size_t k = 1; k < all.size(); ++k) {
    if (std::get<0>(all[k]) == std::get<0>(all[k - 1]) &&
        std::get<1>(all[k]) == std::get<1>(all[k - 1])) {
      throw InvalidArgument("duplicate edge (" + std::to_string(std::get<0>(all[k])) + ", " +
                            std::to_string(std::get<1>(all[k])) + ")");
    }
  }

  Graph g;
  g.num_nodes_ = num_nodes;
  g.offsets_.assign(num_nodes + 1, 0);
  g.weighted_degree_.assign(num_nodes, 0.0);
  g.edges_.reserve(all.size());
  for (const auto& [src, dst, w] : all) {
    ++g.offsets_[src + 1];
    g.edges_.push_back({dst, w});
    g.weighted_degree_[src] += w;
  }
  for (std::size_t i = 0; i < num_nodes; ++i) g.offsets_[i + 1] += g.offsets_[i];
  return g;
}

double Graph::weight(NodeId source, NodeId target) const {
  const auto edges = out_edges(source);
  const auto it = std::lower_bound(edges.begin(), edges.end(), target,
                                   [](const Edge& e, NodeId t) { return e.target < t; });
  return (it != edges.end() && it->target == target) ? it->weight : 0.0;
}

bool Graph::has_negative_weights() const {
  return std::any_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.weight < 0; });
}

bool Graph::is_symmetric(double tol) const {
  for (NodeId i = 0; i < num_nodes_; ++i) {
    for (const Edge& e : out_edges(i)) {
      if (std::abs(weight(e.target, i) - e.weight) > tol) return false;
    }
  }
  return true;
}

std::vector<WeightedEdge> Graph::edge_list() const {
  std::vector<WeightedEdge> out;
  out.reserve(edges_.size());
  for (NodeId i = 0; i < num_nodes_; ++i) {
    for (const Edge& e : out_edges(i)) out.emplace_back(i, e.target, e.weight);
  }
  return out;
}

DenseMatrix Graph::to_dense() const {
  DenseMatrix w = DenseMatrix::Zero(num_nodes_, num_nodes_);
  for (NodeId i = 0; i < num_nodes_; ++i) {
    for (const Edge& e : out_edges(i)) w(i, e.target) = e.weight;
  }
  return w;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto start = s.find_first_not_of(" \t\r", pos);
    if (start == std::string_view::npos) break;
    auto end = s.find_first_of(" \t\r", start);
    if (end == std::string_view::npos) end = s.size();
    tokens.push_back(s.substr(start, end - start));
    pos = end;
  }
  return tokens;
}

long long parse_node(std::string_view tok, std::size_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError("invalid node id '" + std::string(tok) + "'", line);
  }
  if (v < 0) throw ParseError("negative node id " + std::to_string(v), line);
  if (v >= static_cast<long long>(std::numeric_limits<NodeId>::max())) {
    throw ParseError("node id " + std::to_string(v) + " too large", line);
  }
  return v;
}

double parse_weight(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError("invalid weight '" + std::string(tok) + "'", line);
  }
  if (!std::isfinite(v)) throw ParseError("non-finite weight", line);
  return v;
}

}  // namespace

Graph load_edge_list(std::istream& in, bool directed, std::size_t min_nodes) {
  std::vector<WeightedEdge> edges;
  std::vector<std::size_t> edge_line;
  std::size_t num_nodes = min_nodes;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text(raw);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) {
      text = text.substr(0, hash);
    }
    text = trim(text);
    if (text.empty()) continue;
    const auto tokens = split_ws(text);
    if (tokens.size() < 2 || tokens.size() > 3) {
      throw ParseError("expected '<src> <dst> [weight]', got " + std::to_string(tokens.size()) +
                           " fields",
                       line);
    }
    const auto src = parse_node(tokens[0], line);
    const auto dst = parse_node(tokens[1], line);
    const double w = tokens.size() == 3 ? parse_weight(tokens[2], line) : 1.0;
    edges.emplace_back(static_cast<NodeId>(src), static_cast<NodeId>(dst), w);
    edge_line.push_back(line);
    num_nodes = std::max<std::size_t>(num_nodes, static_cast<std::size_t>(std::max(src, dst)) + 1);
  }
  if (num_nodes == 0) throw ParseError("edge list contains no edges", 0);

  // Duplicates are reported against the line that repeats an earlier edge.
  std::vector<std::pair<std::pair<NodeId, NodeId>, std::size_t>> keys;
  keys.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    auto [s, t, w] = edges[k];
    if (!directed && t < s) std::swap(s, t);
    keys.push_back({{s, t}, edge_line[k]});
  }
  std::sort(keys.begin(), keys.end());
  for (std::size_t k = 1; k < keys.size(); ++k) {
    if (keys[k].first == keys[k - 1].first) {
      throw ParseError("duplicate edge (" + std::to_string(keys[k].first.first) + ", " +
                           std::to_string(keys[k].first.second) + ")",
                       keys[k].second);
    }
  }
  return Graph::from_edges(num_nodes, edges, directed);
}

Graph load_edge_list_file(const std::filesystem::path& path, bool directed,
                          std::size_t min_nodes) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open edge list '" + path.string() + "'");
  return load_edge_list(in, directed, min_nodes);
}

void write_edge_list(std::ostream& out, const Graph& g, bool undirected_once) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& [s, t, w] : g.edge_list()) {
    if (undirected_once && t < s) continue;
    out << s << ' ' << t << ' ' << w << '\n';
  }
  out.precision(old_precision);
}

Graph normalized_adjacency(const Graph& g) {
  if (g.has_negative_weights()) {
    throw InvalidArgument("normalized_adjacency requires non-negative weights");
  }
  std::vector<WeightedEdge> edges;
  edges.reserve(g.num_edges());
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const double di = g.weighted_degree(i);
    for (const Edge& e : g.out_edges(i)) {
      const double dj = g.weighted_degree(e.target);
      const double w = (di > 0.0 && dj > 0.0) ? e.weight / std::sqrt(di * dj) : 0.0;
      edges.emplace_back(i, e.target, w);
    }
  }
  return Graph::from_edges(g.num_nodes(), edges, /*directed=*/true);
}

std::vector<double> LaplacianOperator::apply(std::span<const double> x) const {
  if (x.size() != size()) throw InvalidArgument("Laplacian apply: dimension mismatch");
  std::vector<double> y(x.begin(), x.end());
  for (NodeId i = 0; i < size(); ++i) {
    for (const Edge& e : normalized_.out_edges(i)) y[i] -= e.weight * x[e.target];
  }
  return y;
}

DenseMatrix LaplacianOperator::to_dense() const {
  return DenseMatrix::Identity(size(), size()) - normalized_.to_dense();
}

LaplacianOperator laplacian_as_operator(const Graph& g) {
  return LaplacianOperator(normalized_adjacency(g));
}

SpectralRadiusEstimate spectral_radius(const Graph& g, double tol, std::size_t max_iters) {
  if (!(tol > 0.0)) throw InvalidArgument("spectral_radius: tol must be positive");
  const std::size_t n = g.num_nodes();
  SpectralRadiusEstimate est;
  if (n == 0) {
    est.converged = true;
    return est;
  }
  // Iterate B = |W| + I so the Perron root is strictly dominant even for
  // bipartite graphs; every iterate stays strictly positive.
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> y(n);
  double previous = std::numeric_limits<double>::infinity();
  double previous_change = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= max_iters; ++it) {
    double upper = 0.0;
    double lower = std::numeric_limits<double>::infinity();
    double norm2 = 0.0;
    for (NodeId i = 0; i < n; ++i) {
      double acc = x[i];
      for (const Edge& e : g.out_edges(i)) acc += std::abs(e.weight) * x[e.target];
      y[i] = acc;
      if (x[i] > 0.0) {
        upper = std::max(upper, acc / x[i]);
        lower = std::min(lower, acc / x[i]);
      }
      norm2 += acc * acc;
    }
    const double norm = std::sqrt(norm2);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    est.value = std::max(0.0, upper - 1.0);
    est.iterations = it;
    // The lower ratio certifies the gap on irreducible graphs. Otherwise the
    // remaining error is extrapolated from the geometric decay of the changes.
    const double change = std::abs(upper - previous);
    const double rate = std::clamp(change / previous_change, 0.0, 1.0 - 1e-6);
    if (upper - lower < tol || (it > 2 && change / (1.0 - rate) < tol)) {
      est.converged = true;
      break;
    }
    previous = upper;
    previous_change = change;
  }
  return est;
}

}  // namespace ggrf
