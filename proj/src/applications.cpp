#include "ggrf/applications.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "ggrf/errors.hpp"
#include "ggrf/estimator.hpp"
#include "ggrf/rng.hpp"

namespace ggrf {

namespace {

struct Lloyd {
  const DenseMatrix& k;
  int num_clusters;
  std::size_t n;

  // d2(i, c) for every node and cluster given the current labels.
  DenseMatrix distances(const std::vector<int>& labels, std::vector<std::size_t>& sizes) const {
    const auto nn = static_cast<Eigen::Index>(n);
    sizes.assign(static_cast<std::size_t>(num_clusters), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    DenseMatrix sums = DenseMatrix::Zero(nn, num_clusters);  // sum_{j in c} K_ij
    for (Eigen::Index j = 0; j < nn; ++j) sums.col(labels[static_cast<std::size_t>(j)]) += k.col(j);
    DenseMatrix d = DenseMatrix::Constant(nn, num_clusters, std::numeric_limits<double>::infinity());
    for (int c = 0; c < num_clusters; ++c) {
      const auto size = static_cast<double>(sizes[static_cast<std::size_t>(c)]);
      if (size == 0.0) continue;
      double intra = 0.0;
      for (Eigen::Index j = 0; j < nn; ++j) {
        if (labels[static_cast<std::size_t>(j)] == c) intra += sums(j, c);
      }
      intra /= size * size;
      for (Eigen::Index i = 0; i < nn; ++i) d(i, c) = k(i, i) - 2.0 * sums(i, c) / size + intra;
    }
    return d;
  }

  std::vector<int> seed_centres(StreamRng& rng) const {
    std::vector<std::size_t> centres{static_cast<std::size_t>(rng.below(n))};
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    auto dist = [&](std::size_t i, std::size_t c) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto cc = static_cast<Eigen::Index>(c);
      return std::max(0.0, k(ii, ii) - 2.0 * k(ii, cc) + k(cc, cc));
    };
    while (centres.size() < static_cast<std::size_t>(num_clusters)) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        best[i] = std::min(best[i], dist(i, centres.back()));
        total += best[i];
      }
      std::size_t pick = 0;
      if (total > 0.0) {
        double r = rng.uniform() * total;
        for (pick = 0; pick + 1 < n; ++pick) {
          r -= best[pick];
          if (r < 0.0 && best[pick] > 0.0) break;
        }
      } else {
        pick = static_cast<std::size_t>(rng.below(n));
      }
      centres.push_back(pick);
    }
    std::vector<int> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      double d_best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centres.size(); ++c) {
        const double d = dist(i, centres[c]);
        if (d < d_best) {
          d_best = d;
          labels[i] = static_cast<int>(c);
        }
      }
    }
    return labels;
  }

  KMeansResult run(std::uint64_t seed, std::size_t max_iters) const {
    StreamRng rng(seed);
    KMeansResult out;
    out.labels = seed_centres(rng);
    std::vector<std::size_t> sizes;
    for (out.iterations = 0; out.iterations < max_iters; ++out.iterations) {
      DenseMatrix d = distances(out.labels, sizes);
      std::vector<int> next(n);
      for (std::size_t i = 0; i < n; ++i) {
        Eigen::Index arg = 0;
        d.row(static_cast<Eigen::Index>(i)).minCoeff(&arg);
        next[i] = static_cast<int>(arg);
      }
      // Re-seed empty clusters from the farthest point, lowest cluster first.
      std::vector<std::size_t> counts(static_cast<std::size_t>(num_clusters), 0);
      for (int l : next) ++counts[static_cast<std::size_t>(l)];
      for (int c = 0; c < num_clusters; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) continue;
        double far = 0.0;
        std::size_t far_i = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (counts[static_cast<std::size_t>(next[i])] < 2) continue;
          const double di = d(static_cast<Eigen::Index>(i), next[i]);
          if (di > far) {
            far = di;
            far_i = i;
          }
        }
        if (far_i == n) continue;
        --counts[static_cast<std::size_t>(next[far_i])];
        next[far_i] = c;
        ++counts[static_cast<std::size_t>(c)];
      }
      if (next == out.labels) {
        out.converged = true;
        break;
      }
      out.labels = std::move(next);
    }
    const DenseMatrix d = distances(out.labels, sizes);
    out.objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) out.objective += d(static_cast<Eigen::Index>(i), out.labels[i]);
    return out;
  }
};

std::vector<int> first_appearance_labels(const std::vector<int>& labels) {
  std::vector<int> map;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto l = static_cast<std::size_t>(labels[i]);
    if (map.size() <= l) map.resize(l + 1, -1);
    if (map[l] < 0) map[l] = static_cast<int>(std::count_if(map.begin(), map.end(), [](int v) { return v >= 0; }));
    out[i] = map[l];
  }
  return out;
}

}  // namespace

KMeansResult kernel_kmeans(const DenseMatrix& k, int num_clusters, std::size_t max_iters,
                           std::uint64_t seed, std::size_t n_init) {
  if (k.rows() != k.cols()) throw InvalidArgument("kernel_kmeans: kernel matrix must be square");
  const auto n = static_cast<std::size_t>(k.rows());
  if (num_clusters < 2 || static_cast<std::size_t>(num_clusters) > n) {
    throw InvalidArgument("kernel_kmeans: need 2 <= k <= N");
  }
  if (!k.allFinite()) throw NumericalError("kernel_kmeans: kernel matrix has non-finite entries");
  const DenseMatrix sym = 0.5 * (k + k.transpose());
  const Lloyd lloyd{sym, num_clusters, n};
  KMeansResult best;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, n_init); ++r) {
    auto result = lloyd.run(derive_seed(seed, r), max_iters);
    if (r == 0 || result.objective < best.objective) best = std::move(result);
  }
  best.labels = first_appearance_labels(best.labels);
  return best;
}

double clustering_error(std::span<const int> labels_a, std::span<const int> labels_b) {
  if (labels_a.size() != labels_b.size()) {
    throw InvalidArgument("clustering_error: labelings have different lengths");
  }
  const std::size_t n = labels_a.size();
  if (n < 2) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((labels_a[i] == labels_a[j]) != (labels_b[i] == labels_b[j])) ++wrong;
    }
  }
  return static_cast<double>(wrong) / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

namespace {

void check_regression_inputs(std::size_t n, const DenseMatrix& attrs, const std::vector<bool>& mask) {
  if (static_cast<std::size_t>(attrs.rows()) != n || mask.size() != n) {
    throw InvalidArgument("kernel regression: attributes, mask and kernel disagree on N");
  }
  if (std::all_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw InvalidArgument("kernel regression: every node is masked, nothing to predict from");
  }
}

DenseMatrix masked_attributes(const DenseMatrix& attrs, const std::vector<bool>& mask) {
  DenseMatrix v = attrs;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) v.row(static_cast<Eigen::Index>(i)).setZero();
  }
  return v;
}

}  // namespace

DenseMatrix kernel_regression_predict(const FeatureMatrix& phi1, const FeatureMatrix& phi2,
                                      const DenseMatrix& attrs, const std::vector<bool>& mask) {
  check_regression_inputs(phi1.n(), attrs, mask);
  const DenseMatrix v = masked_attributes(attrs, mask);
  DenseMatrix out(v.rows(), v.cols());
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    const Eigen::VectorXd col = v.col(c);
    const auto r = kernel_matvec(phi1, phi2, std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
    out.col(c) = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
  }
  return out;
}

DenseMatrix kernel_regression_predict(const DenseMatrix& k_hat, const DenseMatrix& attrs,
                                      const std::vector<bool>& mask) {
  if (k_hat.rows() != k_hat.cols()) throw InvalidArgument("kernel regression: K must be square");
  check_regression_inputs(static_cast<std::size_t>(k_hat.rows()), attrs, mask);
  return k_hat * masked_attributes(attrs, mask);
}

double angular_error(const DenseMatrix& pred, const DenseMatrix& truth, const std::vector<bool>& mask) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols() ||
      mask.size() != static_cast<std::size_t>(pred.rows())) {
    throw InvalidArgument("angular_error: shape mismatch");
  }
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const auto p = pred.row(static_cast<Eigen::Index>(i));
    const auto t = truth.row(static_cast<Eigen::Index>(i));
    const double tn = t.norm();
    if (!(tn > 0.0)) throw InvalidArgument("angular_error: zero target vector at node " + std::to_string(i));
    const double pn = p.norm();
    const double cosine = pn > 0.0 ? std::clamp(p.dot(t) / (pn * tn), -1.0, 1.0) : 0.0;
    total += 1.0 - cosine;
    ++count;
  }
  if (count == 0) throw InvalidArgument("angular_error: mask selects no nodes");
  return total / static_cast<double>(count);
}

std::vector<bool> random_mask(std::size_t n, double fraction, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("random_mask: need at least two nodes");
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("random_mask: fraction outside (0, 1)");
  auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  count = std::clamp<std::size_t>(count, 1, n - 1);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  StreamRng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }
  std::vector<bool> mask(n, false);
  for (std::size_t i = 0; i < count; ++i) mask[order[i]] = true;
  return mask;
}

DenseMatrix read_attributes(std::istream& in) {
  std::vector<std::array<double, 3>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::array<double, 3> r{};
    if (!(ss >> r[0] >> r[1] >> r[2])) throw ParseError("expected three numbers", lineno);
    std::string rest;
    if (ss >> rest) throw ParseError("expected three numbers, found extra token '" + rest + "'", lineno);
    for (double v : r) {
      if (!std::isfinite(v)) throw ParseError("non-finite attribute value", lineno);
    }
    rows.push_back(r);
  }
  DenseMatrix out(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < 3; ++c) out(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(c)];
  }
  return out;
}

DenseMatrix read_attributes_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open attribute file " + path.string());
  return read_attributes(in);
}

void write_attributes(std::ostream& out, const DenseMatrix& attrs) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < attrs.rows(); ++i) {
    for (Eigen::Index c = 0; c < attrs.cols(); ++c) out << (c ? " " : "") << attrs(i, c);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace ggrf
