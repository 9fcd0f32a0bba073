#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "ggrf/graph.hpp"
#include "ggrf/modulation.hpp"

namespace ggrf {

/// Sampling configuration shared by every walk-based routine.
struct WalkConfig {
  double p_halt = 0.1;
  std::size_t m = 16;     // walks per node
  double sigma = 1.0;     // multiplies every traversed weight
  std::uint64_t seed = 0;
  unsigned threads = 0;   // 0: $GGRF_THREADS or hardware concurrency

  void validate() const;
};

/// N x N random feature matrix, row i = phi(i), stored as sorted sparse rows.
///
/// `m() == 0` marks a deterministic matrix (e.g. the identity) that was not
/// produced by walks.
class FeatureMatrix {
 public:
  struct Entry {
    NodeId col;
    double value;
    bool operator==(const Entry&) const = default;
  };

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t n, std::size_t m, double p_halt, double sigma, std::uint64_t seed,
                std::vector<std::size_t> offsets, std::vector<Entry> entries);

  static FeatureMatrix identity(std::size_t n, std::uint64_t seed = 0);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  double p_halt() const noexcept { return p_halt_; }
  double sigma() const noexcept { return sigma_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool sampled() const noexcept { return m_ > 0; }

  std::span<const Entry> row(NodeId i) const {
    return {entries_.data() + offsets_[i], entries_.data() + offsets_[i + 1]};
  }
  std::size_t nnz() const noexcept { return entries_.size(); }

  /// Phi x and Phi^T x.
  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> multiply_transpose(std::span<const double> x) const;

  DenseMatrix to_dense() const;

  /// Binary container: magic, N, m, p_halt, sigma, seed, then CSR arrays.
  void save(std::ostream& out) const;
  static FeatureMatrix load(std::istream& in);
  void save_file(const std::filesystem::path& path) const;
  static FeatureMatrix load_file(const std::filesystem::path& path);

  /// Dense N x N CSV, one row per line.
  void write_csv(std::ostream& out) const;

  /// Bit-exact comparison of data and metadata.
  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  double p_halt_ = 0.0;
  double sigma_ = 1.0;
  std::uint64_t seed_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Entry> entries_;
};

/// Per-length decomposition of the walk loads: Phi^(l)[i][v] is the (1/m)-scaled
/// load deposited at v after exactly l steps of walks started at i. Combining
/// with any f reproduces sample_features bit-exactly for the same seed.
class LengthFeatureTensor {
 public:
  struct Entry {
    NodeId col;
    std::uint32_t length;
    double value;
  };

  LengthFeatureTensor() = default;
  LengthFeatureTensor(WalkConfig cfg, std::size_t n, std::size_t l_max,
                      std::vector<std::size_t> offsets, std::vector<Entry> entries);

  std::size_t n() const noexcept { return n_; }
  const WalkConfig& config() const noexcept { return cfg_; }
  std::size_t l_max() const noexcept { return l_max_; }

  /// Longest walk length present (0 for an empty tensor).
  std::size_t max_length() const noexcept { return max_length_; }

  /// Number of stored (row, col, length) entries with length > l_max.
  std::size_t overflow_steps() const noexcept { return overflow_; }

  /// Entries of row i sorted by (col, length).
  std::span<const Entry> row(NodeId i) const {
    return {entries_.data() + offsets_[i], entries_.data() + offsets_[i + 1]};
  }

  /// sum_l f(l) Phi^(l). `f` must cover lengths 0..max_length(); for a
  /// ModulationFn the table is extended on the fly past l_max.
  FeatureMatrix combine(std::span<const double> f) const;
  FeatureMatrix combine(const ModulationFn& f) const;

  /// Dense sum_l f(l) Phi^(l).
  DenseMatrix combine_dense(std::span<const double> f) const;

  /// Phi^(l) alone.
  FeatureMatrix slice(std::size_t length) const;

  /// out[l] = <M, Phi^(l)> (Frobenius inner product), for l = 0..max_length().
  std::vector<double> contract(const DenseMatrix& m) const;

 private:
  WalkConfig cfg_;
  std::size_t n_ = 0;
  std::size_t l_max_ = 0;
  std::size_t max_length_ = 0;
  std::size_t overflow_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Entry> entries_;
};

/// Runs cfg.m walks from every node of `g` and returns the modulated features.
/// Deterministic in cfg.seed regardless of cfg.threads.
FeatureMatrix sample_features(const Graph& g, const ModulationFn& f, const WalkConfig& cfg);

/// Same walks as sample_features, kept per length.
LengthFeatureTensor sample_length_features(const Graph& g, const WalkConfig& cfg,
                                           std::size_t l_max);

/// Two feature matrices from independent streams derived from cfg.seed, for
/// estimating K = E[Phi1 Phi2^T] including its diagonal.
std::pair<FeatureMatrix, FeatureMatrix> sample_feature_pair(const Graph& g, const ModulationFn& f1,
                                                            const ModulationFn& f2,
                                                            const WalkConfig& cfg);

/// Seeds used by sample_feature_pair and the length-tensor equivalent.
std::pair<std::uint64_t, std::uint64_t> pair_seeds(std::uint64_t seed);

std::pair<LengthFeatureTensor, LengthFeatureTensor> sample_length_feature_pair(
    const Graph& g, const WalkConfig& cfg, std::size_t l_max);

/// Number of deposits (modulation values used) by each of the cfg.m walks from
/// `start`, replaying the streams of sample_features.
std::vector<std::size_t> walk_lengths(const Graph& g, NodeId start, const WalkConfig& cfg);

}  // namespace ggrf
