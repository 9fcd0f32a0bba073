#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "ggrf/graph.hpp"
#include "ggrf/walker.hpp"

namespace ggrf {

/// Largest N for which a full Gram matrix may be materialised.
inline constexpr std::size_t kMaxDenseNodes = 4096;

/// K^_ij = phi1(i)^T phi2(j). Sampled inputs must come from different seeds,
/// otherwise the diagonal is biased; this is rejected with InvalidArgument.
DenseMatrix estimate_gram(const FeatureMatrix& phi1, const FeatureMatrix& phi2,
                          bool symmetrize = false, unsigned threads = 0);

/// phi1 (phi2^T v) without forming the Gram matrix.
std::vector<double> kernel_matvec(const FeatureMatrix& phi1, const FeatureMatrix& phi2,
                                  std::span<const double> v);

/// ||K - K^||_F / ||K||_F.
double relative_frobenius_error(const DenseMatrix& k, const DenseMatrix& k_hat);

/// Dense matrix as CSV with round-trip precision.
void write_matrix_csv(std::ostream& out, const DenseMatrix& m);

}  // namespace ggrf
