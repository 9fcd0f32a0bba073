#include "ggrf/estimator.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "ggrf/errors.hpp"
#include "ggrf/parallel.hpp"

namespace ggrf {

DenseMatrix estimate_gram(const FeatureMatrix& phi1, const FeatureMatrix& phi2, bool symmetrize,
                          unsigned threads) {
  if (phi1.n() != phi2.n()) throw InvalidArgument("estimate_gram: feature matrices differ in size");
  if (phi1.n() > kMaxDenseNodes) {
    throw InvalidArgument("estimate_gram: N exceeds the dense limit; use kernel_matvec");
  }
  if (phi1.sampled() && phi2.sampled() && phi1.seed() == phi2.seed()) {
    throw InvalidArgument(
        "estimate_gram: both feature matrices were sampled with the same seed, which biases the "
        "diagonal; sample them from independent seeds (sample_feature_pair)");
  }
  const std::size_t n = phi1.n();
  // Column lists of phi2: for each feature c, the (node j, value) pairs.
  std::vector<std::size_t> col_offsets(n + 1, 0);
  for (std::size_t j = 0; j < n; ++j) {
    for (const auto& e : phi2.row(static_cast<NodeId>(j))) ++col_offsets[e.col + 1];
  }
  for (std::size_t c = 0; c < n; ++c) col_offsets[c + 1] += col_offsets[c];
  std::vector<FeatureMatrix::Entry> cols(col_offsets[n]);
  {
    auto fill = col_offsets;
    for (std::size_t j = 0; j < n; ++j) {
      for (const auto& e : phi2.row(static_cast<NodeId>(j))) {
        cols[fill[e.col]++] = {static_cast<NodeId>(j), e.value};
      }
    }
  }
  const auto nn = static_cast<Eigen::Index>(n);
  // Row-major scratch so each task writes one contiguous row.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> k =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(nn, nn);
  parallel_for(n, threads, [&](std::size_t i) {
    double* out = k.row(static_cast<Eigen::Index>(i)).data();
    for (const auto& a : phi1.row(static_cast<NodeId>(i))) {
      for (std::size_t q = col_offsets[a.col]; q < col_offsets[a.col + 1]; ++q) {
        out[cols[q].col] += a.value * cols[q].value;
      }
    }
  });
  DenseMatrix result = k;
  if (symmetrize) result = (0.5 * (result + result.transpose())).eval();
  return result;
}

std::vector<double> kernel_matvec(const FeatureMatrix& phi1, const FeatureMatrix& phi2,
                                  std::span<const double> v) {
  if (phi1.n() != phi2.n() || v.size() != phi1.n()) {
    throw InvalidArgument("kernel_matvec: dimension mismatch (N = " + std::to_string(phi1.n()) +
                          ", N2 = " + std::to_string(phi2.n()) +
                          ", len(v) = " + std::to_string(v.size()) + ")");
  }
  const auto inner = phi2.multiply_transpose(v);
  return phi1.multiply(inner);
}

double relative_frobenius_error(const DenseMatrix& k, const DenseMatrix& k_hat) {
  if (k.rows() != k_hat.rows() || k.cols() != k_hat.cols()) {
    throw InvalidArgument("relative_frobenius_error: shape mismatch");
  }
  const double denom = k.norm();
  if (!(denom > 0.0)) throw InvalidArgument("relative_frobenius_error: reference has zero norm");
  return (k - k_hat).norm() / denom;
}

void write_matrix_csv(std::ostream& out, const DenseMatrix& m) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace ggrf
