#include "ggrf/walker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "ggrf/errors.hpp"
#include "ggrf/parallel.hpp"
#include "ggrf/rng.hpp"

namespace ggrf {

void WalkConfig::validate() const {
  if (!(p_halt > 0.0 && p_halt < 1.0)) throw InvalidArgument("p_halt must lie in (0, 1)");
  if (m < 1) throw InvalidArgument("number of walks m must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be positive");
}

namespace {

struct Deposit {
  NodeId node;
  std::uint32_t length;
  double load;
};

// One start node: deposit, move, reweight, then flip the halting coin.
// Deposits are appended in walk order.
void run_walks(const Graph& g, NodeId start, const WalkConfig& cfg, std::vector<Deposit>& out) {
  const double inv_keep = 1.0 / (1.0 - cfg.p_halt);
  for (std::size_t w = 0; w < cfg.m; ++w) {
    StreamRng rng(derive_seed(cfg.seed, start, w));
    NodeId node = start;
    double load = 1.0;
    std::uint32_t length = 0;
    for (;;) {
      out.push_back({node, length, load});
      const auto edges = g.out_edges(node);
      if (edges.empty()) break;
      const Edge& e = edges[rng.below(edges.size())];
      load *= static_cast<double>(edges.size()) * inv_keep * cfg.sigma * e.weight;
      node = e.target;
      ++length;
      if (rng.uniform() < cfg.p_halt) break;
    }
  }
}

// Groups deposits by (node, length), summing in walk order, and scales by 1/m.
void reduce_deposits(std::vector<Deposit>& deposits, std::size_t m,
                     std::vector<LengthFeatureTensor::Entry>& out) {
  std::stable_sort(deposits.begin(), deposits.end(), [](const Deposit& a, const Deposit& b) {
    return a.node != b.node ? a.node < b.node : a.length < b.length;
  });
  const double md = static_cast<double>(m);
  for (std::size_t k = 0; k < deposits.size();) {
    const NodeId node = deposits[k].node;
    const std::uint32_t length = deposits[k].length;
    double acc = 0.0;
    for (; k < deposits.size() && deposits[k].node == node && deposits[k].length == length; ++k) {
      acc += deposits[k].load;
    }
    out.push_back({node, length, acc / md});
  }
}

// Shared by sample_features and LengthFeatureTensor::combine so that both
// accumulate sum_l f(l) Phi^(l) in exactly the same order.
template <class F>
void combine_row(std::span<const LengthFeatureTensor::Entry> row, F&& f,
                 std::vector<FeatureMatrix::Entry>& out) {
  for (std::size_t k = 0; k < row.size();) {
    const NodeId col = row[k].col;
    double acc = 0.0;
    for (; k < row.size() && row[k].col == col; ++k) acc += f(row[k].length) * row[k].value;
    out.push_back({col, acc});
  }
}

struct LengthRows {
  std::vector<std::size_t> offsets;
  std::vector<LengthFeatureTensor::Entry> entries;
};

LengthRows sample_rows(const Graph& g, const WalkConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<LengthFeatureTensor::Entry>> rows(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    thread_local std::vector<Deposit> deposits;
    deposits.clear();
    run_walks(g, static_cast<NodeId>(i), cfg, deposits);
    reduce_deposits(deposits, cfg.m, rows[i]);
  });
  LengthRows out;
  out.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) out.offsets[i + 1] = out.offsets[i] + rows[i].size();
  out.entries.reserve(out.offsets[n]);
  for (auto& r : rows) out.entries.insert(out.entries.end(), r.begin(), r.end());
  return out;
}

template <class T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw ParseError("truncated feature matrix file", 0);
  }
  return value;
}

constexpr std::uint64_t kMagic = 0x3146524747ULL;  // "GGRF1"

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t n, std::size_t m, double p_halt, double sigma,
                             std::uint64_t seed, std::vector<std::size_t> offsets,
                             std::vector<Entry> entries)
    : n_(n),
      m_(m),
      p_halt_(p_halt),
      sigma_(sigma),
      seed_(seed),
      offsets_(std::move(offsets)),
      entries_(std::move(entries)) {
  if (offsets_.size() != n_ + 1 || offsets_.back() != entries_.size()) {
    throw InvalidArgument("FeatureMatrix: inconsistent row offsets");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      if (entries_[k].col >= n_) throw InvalidArgument("FeatureMatrix: column out of range");
      if (!std::isfinite(entries_[k].value)) throw NumericalError("FeatureMatrix: non-finite entry");
      if (k > offsets_[i] && entries_[k].col <= entries_[k - 1].col) {
        throw InvalidArgument("FeatureMatrix: row entries must be strictly increasing");
      }
    }
  }
}

FeatureMatrix FeatureMatrix::identity(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> offsets(n + 1);
  std::vector<Entry> entries(n);
  for (std::size_t i = 0; i < n; ++i) {
    offsets[i + 1] = i + 1;
    entries[i] = {static_cast<NodeId>(i), 1.0};
  }
  return FeatureMatrix(n, 0, 0.0, 1.0, seed, std::move(offsets), std::move(entries));
}

std::vector<double> FeatureMatrix::multiply(std::span<const double> x) const {
  if (x.size() != n_) throw InvalidArgument("FeatureMatrix::multiply: dimension mismatch");
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (const auto& e : row(static_cast<NodeId>(i))) acc += e.value * x[e.col];
    y[i] = acc;
  }
  return y;
}

std::vector<double> FeatureMatrix::multiply_transpose(std::span<const double> x) const {
  if (x.size() != n_) throw InvalidArgument("FeatureMatrix::multiply_transpose: dimension mismatch");
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (const auto& e : row(static_cast<NodeId>(i))) y[e.col] += e.value * xi;
  }
  return y;
}

DenseMatrix FeatureMatrix::to_dense() const {
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    for (const auto& e : row(static_cast<NodeId>(i))) out(static_cast<Eigen::Index>(i), e.col) = e.value;
  }
  return out;
}

void FeatureMatrix::save(std::ostream& out) const {
  write_pod(out, kMagic);
  write_pod(out, static_cast<std::uint64_t>(n_));
  write_pod(out, static_cast<std::uint64_t>(m_));
  write_pod(out, p_halt_);
  write_pod(out, sigma_);
  write_pod(out, seed_);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto r = row(static_cast<NodeId>(i));
    write_pod(out, static_cast<std::uint64_t>(r.size()));
    for (const auto& e : r) {
      write_pod(out, static_cast<std::uint32_t>(e.col));
      write_pod(out, e.value);
    }
  }
  if (!out) throw Error("failed to write feature matrix");
}

FeatureMatrix FeatureMatrix::load(std::istream& in) {
  if (read_pod<std::uint64_t>(in) != kMagic) throw ParseError("not a feature matrix file", 0);
  const auto n = read_pod<std::uint64_t>(in);
  const auto m = read_pod<std::uint64_t>(in);
  const auto p_halt = read_pod<double>(in);
  const auto sigma = read_pod<double>(in);
  const auto seed = read_pod<std::uint64_t>(in);
  if (n > std::numeric_limits<NodeId>::max()) throw ParseError("feature matrix too large", 0);
  std::vector<std::size_t> offsets{0};
  std::vector<Entry> entries;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto count = read_pod<std::uint64_t>(in);
    if (count > n) throw ParseError("corrupt feature matrix row", 0);
    for (std::uint64_t k = 0; k < count; ++k) {
      const auto col = read_pod<std::uint32_t>(in);
      const auto value = read_pod<double>(in);
      entries.push_back({col, value});
    }
    offsets.push_back(entries.size());
  }
  return FeatureMatrix(n, m, p_halt, sigma, seed, std::move(offsets), std::move(entries));
}

void FeatureMatrix::save_file(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  save(out);
}

FeatureMatrix FeatureMatrix::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return load(in);
}

void FeatureMatrix::write_csv(std::ostream& out) const {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  std::vector<double> dense(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    std::fill(dense.begin(), dense.end(), 0.0);
    for (const auto& e : row(static_cast<NodeId>(i))) dense[e.col] = e.value;
    for (std::size_t j = 0; j < n_; ++j) out << (j ? "," : "") << dense[j];
    out << '\n';
  }
  out.precision(old_precision);
}

LengthFeatureTensor::LengthFeatureTensor(WalkConfig cfg, std::size_t n, std::size_t l_max,
                                         std::vector<std::size_t> offsets,
                                         std::vector<Entry> entries)
    : cfg_(cfg), n_(n), l_max_(l_max), offsets_(std::move(offsets)), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    max_length_ = std::max<std::size_t>(max_length_, e.length);
    if (e.length > l_max_) ++overflow_;
  }
}

FeatureMatrix LengthFeatureTensor::combine(std::span<const double> f) const {
  if (!entries_.empty() && f.size() <= max_length_) {
    throw InvalidArgument("LengthFeatureTensor::combine: modulation table shorter than longest walk");
  }
  std::vector<std::size_t> offsets{0};
  std::vector<FeatureMatrix::Entry> entries;
  entries.reserve(entries_.size());
  for (std::size_t i = 0; i < n_; ++i) {
    combine_row(row(static_cast<NodeId>(i)), [&](std::size_t l) { return f[l]; }, entries);
    offsets.push_back(entries.size());
  }
  return FeatureMatrix(n_, cfg_.m, cfg_.p_halt, cfg_.sigma, cfg_.seed, std::move(offsets),
                       std::move(entries));
}

FeatureMatrix LengthFeatureTensor::combine(const ModulationFn& f) const {
  return combine(f.prefix(max_length_ + 1));
}

DenseMatrix LengthFeatureTensor::combine_dense(std::span<const double> f) const {
  if (!entries_.empty() && f.size() <= max_length_) {
    throw InvalidArgument("LengthFeatureTensor::combine_dense: modulation table too short");
  }
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    for (const auto& e : row(static_cast<NodeId>(i))) {
      out(static_cast<Eigen::Index>(i), e.col) += f[e.length] * e.value;
    }
  }
  return out;
}

FeatureMatrix LengthFeatureTensor::slice(std::size_t length) const {
  std::vector<std::size_t> offsets{0};
  std::vector<FeatureMatrix::Entry> entries;
  for (std::size_t i = 0; i < n_; ++i) {
    for (const auto& e : row(static_cast<NodeId>(i))) {
      if (e.length == length) entries.push_back({e.col, e.value});
    }
    offsets.push_back(entries.size());
  }
  return FeatureMatrix(n_, cfg_.m, cfg_.p_halt, cfg_.sigma, cfg_.seed, std::move(offsets),
                       std::move(entries));
}

std::vector<double> LengthFeatureTensor::contract(const DenseMatrix& m) const {
  if (static_cast<std::size_t>(m.rows()) != n_ || static_cast<std::size_t>(m.cols()) != n_) {
    throw InvalidArgument("LengthFeatureTensor::contract: dimension mismatch");
  }
  std::vector<double> out(entries_.empty() ? 0 : max_length_ + 1, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (const auto& e : row(static_cast<NodeId>(i))) {
      out[e.length] += e.value * m(static_cast<Eigen::Index>(i), e.col);
    }
  }
  return out;
}

FeatureMatrix sample_features(const Graph& g, const ModulationFn& f, const WalkConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<FeatureMatrix::Entry>> rows(n);
  // Warm the cache past the typical walk length so workers rarely lock.
  std::vector<double> table = f.prefix(min_batch_size(std::max<std::size_t>(1, cfg.m * n), cfg.p_halt, 1e-6));
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    thread_local std::vector<Deposit> deposits;
    thread_local std::vector<LengthFeatureTensor::Entry> grouped;
    deposits.clear();
    grouped.clear();
    run_walks(g, static_cast<NodeId>(i), cfg, deposits);
    reduce_deposits(deposits, cfg.m, grouped);
    combine_row(std::span<const LengthFeatureTensor::Entry>(grouped),
                [&](std::size_t l) { return l < table.size() ? table[l] : f(l); }, rows[i]);
  });
  std::vector<std::size_t> offsets(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + rows[i].size();
  std::vector<FeatureMatrix::Entry> entries;
  entries.reserve(offsets[n]);
  for (auto& r : rows) entries.insert(entries.end(), r.begin(), r.end());
  return FeatureMatrix(n, cfg.m, cfg.p_halt, cfg.sigma, cfg.seed, std::move(offsets),
                       std::move(entries));
}

LengthFeatureTensor sample_length_features(const Graph& g, const WalkConfig& cfg,
                                           std::size_t l_max) {
  auto rows = sample_rows(g, cfg);
  return LengthFeatureTensor(cfg, g.num_nodes(), l_max, std::move(rows.offsets),
                             std::move(rows.entries));
}

std::pair<std::uint64_t, std::uint64_t> pair_seeds(std::uint64_t seed) {
  return {derive_seed(seed, 1), derive_seed(seed, 2)};
}

std::pair<FeatureMatrix, FeatureMatrix> sample_feature_pair(const Graph& g, const ModulationFn& f1,
                                                            const ModulationFn& f2,
                                                            const WalkConfig& cfg) {
  const auto [s1, s2] = pair_seeds(cfg.seed);
  WalkConfig c1 = cfg;
  WalkConfig c2 = cfg;
  c1.seed = s1;
  c2.seed = s2;
  return {sample_features(g, f1, c1), sample_features(g, f2, c2)};
}

std::pair<LengthFeatureTensor, LengthFeatureTensor> sample_length_feature_pair(
    const Graph& g, const WalkConfig& cfg, std::size_t l_max) {
  const auto [s1, s2] = pair_seeds(cfg.seed);
  WalkConfig c1 = cfg;
  WalkConfig c2 = cfg;
  c1.seed = s1;
  c2.seed = s2;
  return {sample_length_features(g, c1, l_max), sample_length_features(g, c2, l_max)};
}

std::vector<std::size_t> walk_lengths(const Graph& g, NodeId start, const WalkConfig& cfg) {
  cfg.validate();
  if (start >= g.num_nodes()) throw InvalidArgument("walk_lengths: start node out of range");
  std::vector<std::size_t> out;
  out.reserve(cfg.m);
  for (std::size_t w = 0; w < cfg.m; ++w) {
    StreamRng rng(derive_seed(cfg.seed, start, w));
    NodeId node = start;
    std::size_t deposits = 0;
    for (;;) {
      ++deposits;
      const auto edges = g.out_edges(node);
      if (edges.empty()) break;
      node = edges[rng.below(edges.size())].target;
      if (rng.uniform() < cfg.p_halt) break;
    }
    out.push_back(deposits);
  }
  return out;
}

}  // namespace ggrf
