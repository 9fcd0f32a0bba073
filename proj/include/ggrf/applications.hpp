#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "ggrf/graph.hpp"
#include "ggrf/walker.hpp"

namespace ggrf {

struct KMeansResult {
  std::vector<int> labels;  // relabelled in order of first appearance
  double objective = 0.0;   // sum of squared feature-space distances to cluster means
  std::size_t iterations = 0;
  bool converged = false;
};

/// Kernelised Lloyd iteration on the symmetric part of `k`, seeded k-means++
/// style from kernel distances. Distance ties go to the lowest cluster index.
/// A cluster that empties is re-seeded with the point farthest from its own
/// centre, provided that distance is positive; otherwise it stays empty.
/// The best of `n_init` restarts (seeds derived from `seed`) is returned.
KMeansResult kernel_kmeans(const DenseMatrix& k, int num_clusters, std::size_t max_iters = 300,
                           std::uint64_t seed = 0, std::size_t n_init = 10);

/// Fraction of unordered node pairs whose same-cluster status differs.
double clustering_error(std::span<const int> labels_a, std::span<const int> labels_b);

/// Masked nodes get sum_{j unmasked} K^(i, j) v_j with K^ = phi1 phi2^T applied
/// through kernel_matvec; rows of unmasked nodes hold the same smoothed sum and
/// are not meaningful predictions.
DenseMatrix kernel_regression_predict(const FeatureMatrix& phi1, const FeatureMatrix& phi2,
                                      const DenseMatrix& attrs, const std::vector<bool>& mask);

/// Same with an explicit Gram matrix.
DenseMatrix kernel_regression_predict(const DenseMatrix& k_hat, const DenseMatrix& attrs,
                                      const std::vector<bool>& mask);

/// Mean of 1 - cos(angle(pred_i, truth_i)) over masked i. A zero prediction
/// scores 1.
double angular_error(const DenseMatrix& pred, const DenseMatrix& truth,
                     const std::vector<bool>& mask);

/// Marks round(fraction * n) nodes (at least 1, at most n - 1), chosen uniformly.
std::vector<bool> random_mask(std::size_t n, double fraction, std::uint64_t seed);

/// `<x> <y> <z>` per line, one line per node; `#` comments allowed.
DenseMatrix read_attributes(std::istream& in);
DenseMatrix read_attributes_file(const std::filesystem::path& path);
void write_attributes(std::ostream& out, const DenseMatrix& attrs);

}  // namespace ggrf
