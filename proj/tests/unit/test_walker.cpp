#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "ggrf/errors.hpp"
#include "ggrf/estimator.hpp"
#include "ggrf/exact_oracle.hpp"
#include "ggrf/generators.hpp"
#include "ggrf/walker.hpp"

using namespace ggrf;

TEST_SUITE("walker") {

TEST_CASE("isolated node deposits f(0) only") {
  const Graph g = Graph::from_edges(3, std::vector<WeightedEdge>{{0, 1, 1.0}}, false);
  const ModulationFn f = ModulationFn::tabulated({0.7, 5.0, 5.0});
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    const FeatureMatrix phi = sample_features(g, f, {0.2, 7, 1.0, seed, 1});
    const auto row = phi.row(2);
    REQUIRE(row.size() == 1);
    CHECK(row[0].col == 2);
    CHECK(row[0].value == 0.7);
  }
}

TEST_CASE("lazy walker gives the identity") {
  const Graph g = erdos_renyi(15, 0.3, 1);
  const FeatureMatrix phi = sample_features(g, ModulationFn::lazy(), {0.3, 5, 1.0, 4, 1});
  CHECK((phi.to_dense() - DenseMatrix::Identity(15, 15)).norm() == 0.0);
}

TEST_CASE("length tensor") {
  const Graph g = normalized_adjacency(erdos_renyi(12, 0.4, 3));
  const WalkConfig cfg{0.2, 6, 0.9, 17, 1};
  const LengthFeatureTensor t = sample_length_features(g, cfg, 8);
  CHECK((t.slice(0).to_dense() - DenseMatrix::Identity(12, 12)).norm() == 0.0);

  const ModulationFn f = closed_form_modulation(KernelSpec::diffusion(0.7));
  CHECK(t.combine(f) == sample_features(g, f, cfg));
}

TEST_CASE("length slices are unbiased for powers of sigma W") {
  const Graph g = normalized_adjacency(erdos_renyi(6, 0.6, 2));
  const double sigma = 0.8;
  const DenseMatrix w = sigma * g.to_dense();
  const std::size_t seeds = 400;
  const std::size_t l = 2;
  DenseMatrix sum = DenseMatrix::Zero(6, 6);
  DenseMatrix sum_sq = DenseMatrix::Zero(6, 6);
  for (std::size_t s = 0; s < seeds; ++s) {
    const DenseMatrix x = sample_length_features(g, {0.4, 8, sigma, s, 1}, 10).slice(l).to_dense();
    sum += x;
    sum_sq += x.cwiseProduct(x);
  }
  const DenseMatrix mean = sum / seeds;
  const DenseMatrix var = (sum_sq / seeds - mean.cwiseProduct(mean)) * (seeds / (seeds - 1.0));
  const DenseMatrix want = w * w;
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) {
      const double se = std::sqrt(var(i, j) / seeds);
      CHECK(std::abs(mean(i, j) - want(i, j)) <= 4 * se + 1e-12);
    }
  }
}

TEST_CASE("thread count does not change the features") {
  const Graph g = normalized_adjacency(erdos_renyi(80, 0.08, 5));
  const ModulationFn f = kernel_modulation(KernelSpec::diffusion(0.6));
  const FeatureMatrix one = sample_features(g, f, {0.1, 16, 1.0, 3, 1});
  for (unsigned threads : {2u, 5u}) CHECK(sample_features(g, f, {0.1, 16, 1.0, 3, threads}) == one);
}

TEST_CASE("regulariser folds into the modulation") {
  const Graph g = normalized_adjacency(erdos_renyi(20, 0.25, 6));
  const ModulationFn f = ModulationFn::tabulated({1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625});
  const double beta = 0.5;
  const DenseMatrix a = sample_features(g, f, {0.3, 10, beta, 8, 1}).to_dense();
  const DenseMatrix b = sample_features(g, f.scaled(beta), {0.3, 10, 1.0, 8, 1}).to_dense();
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * a.cwiseAbs().maxCoeff());
}

TEST_CASE("walk lengths replay the sampler") {
  const Graph g = erdos_renyi(10, 0.5, 1);
  const auto lengths = walk_lengths(g, 3, {0.5, 50, 1.0, 2, 1});
  CHECK(lengths.size() == 50);
  for (std::size_t len : lengths) CHECK(len >= 1);
}

TEST_CASE("feature matrix serialisation") {
  const Graph g = erdos_renyi(25, 0.2, 7);
  const FeatureMatrix phi = sample_features(g, kernel_modulation(KernelSpec::diffusion(0.5)),
                                            {0.25, 4, 1.0, 11, 1});
  std::stringstream s;
  phi.save(s);
  CHECK(FeatureMatrix::load(s) == phi);

  std::stringstream bad("not a feature matrix");
  CHECK_THROWS_AS(FeatureMatrix::load(bad), Error);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS((WalkConfig{0.0, 1, 1.0, 0, 1}.validate()), InvalidArgument);
  CHECK_THROWS_AS((WalkConfig{1.0, 1, 1.0, 0, 1}.validate()), InvalidArgument);
  CHECK_THROWS_AS((WalkConfig{0.5, 0, 1.0, 0, 1}.validate()), InvalidArgument);
  CHECK_THROWS_AS((WalkConfig{0.5, 1, 0.0, 0, 1}.validate()), InvalidArgument);
}

}

TEST_SUITE("estimator") {

TEST_CASE("identity features") {
  const FeatureMatrix id = FeatureMatrix::identity(5);
  CHECK((estimate_gram(id, id) - DenseMatrix::Identity(5, 5)).norm() == 0.0);
  CHECK(kernel_matvec(id, id, std::vector<double>(5, 0.0)) == std::vector<double>(5, 0.0));
}

TEST_CASE("matvec matches the dense gram") {
  const Graph g = normalized_adjacency(erdos_renyi(30, 0.2, 3));
  const ModulationFn f = kernel_modulation(KernelSpec::regularised_laplacian(2, 0.5));
  const auto [a, b] = sample_feature_pair(g, f, f, {0.2, 8, 1.0, 5, 1});
  std::vector<double> v(30);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(1.0 + i);
  const auto got = kernel_matvec(a, b, v);
  const Eigen::VectorXd want = estimate_gram(a, b) * Eigen::Map<const Eigen::VectorXd>(v.data(), 30);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(got[i] == doctest::Approx(want(i)).epsilon(1e-12));

  const auto b_id = kernel_matvec(a, FeatureMatrix::identity(30), v);
  const auto direct = a.multiply(v);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(b_id[i] == doctest::Approx(direct[i]).epsilon(1e-12));

  CHECK_THROWS_AS(kernel_matvec(a, b, std::vector<double>(3, 1.0)), InvalidArgument);
}

TEST_CASE("shared seeds are rejected") {
  const Graph g = erdos_renyi(10, 0.3, 1);
  const ModulationFn f = kernel_modulation(KernelSpec::diffusion(0.5));
  const FeatureMatrix phi = sample_features(g, f, {0.2, 4, 1.0, 9, 1});
  CHECK_THROWS_AS(estimate_gram(phi, phi), InvalidArgument);
}

TEST_CASE("relative error") {
  const DenseMatrix i2 = DenseMatrix::Identity(2, 2);
  CHECK(relative_frobenius_error(i2, i2) == 0.0);
  CHECK(relative_frobenius_error(i2, DenseMatrix::Zero(2, 2)) == 1.0);
  CHECK(relative_frobenius_error(i2, 2 * i2) == 1.0);
  CHECK_THROWS_AS(relative_frobenius_error(DenseMatrix::Zero(2, 2), i2), Error);
}

TEST_CASE("pair estimate is close to the kernel on a dense walk budget") {
  const Graph g = erdos_renyi(15, 0.4, 12);
  const KernelSpec spec = KernelSpec::diffusion(0.5);
  const auto [a, b] = sample_feature_pair(normalized_adjacency(g), kernel_modulation(spec),
                                          kernel_modulation(spec), {0.1, 2000, 1.0, 1, 0});
  const DenseMatrix k_hat = spec.prefactor() * estimate_gram(a, b);
  CHECK(relative_frobenius_error(exact_kernel(g, spec), k_hat) < 0.02);
}

}
