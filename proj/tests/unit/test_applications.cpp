#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "ggrf/applications.hpp"
#include "ggrf/errors.hpp"

using namespace ggrf;

TEST_SUITE("applications") {

TEST_CASE("clustering error") {
  const std::vector<int> a{0, 0, 1, 1};
  const std::vector<int> b{0, 1, 0, 1};
  const std::vector<int> swapped{1, 1, 0, 0};
  CHECK(clustering_error(a, a) == 0.0);
  CHECK(clustering_error(a, swapped) == 0.0);
  CHECK(clustering_error(a, b) == doctest::Approx(4.0 / 6.0));
  CHECK_THROWS_AS(clustering_error(a, std::vector<int>{0, 1}), InvalidArgument);
}

TEST_CASE("k-means on separated blocks") {
  DenseMatrix k = DenseMatrix::Zero(6, 6);
  k.topLeftCorner(3, 3).setOnes();
  k.bottomRightCorner(3, 3).setOnes();
  const KMeansResult r = kernel_kmeans(k, 2, 100, 1);
  CHECK(r.labels == std::vector<int>{0, 0, 0, 1, 1, 1});
  CHECK(r.objective == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("k-means on identical points") {
  const DenseMatrix k = DenseMatrix::Ones(5, 5);
  const KMeansResult r = kernel_kmeans(k, 3, 50, 4);
  CHECK(r.labels == std::vector<int>(5, 0));
}

TEST_CASE("k-means is deterministic in its seed") {
  DenseMatrix x = DenseMatrix::Random(20, 3);
  const DenseMatrix k = x * x.transpose();
  CHECK(kernel_kmeans(k, 3, 300, 9).labels == kernel_kmeans(k, 3, 300, 9).labels);
}

TEST_CASE("regression with the identity kernel predicts zero") {
  DenseMatrix attrs(4, 3);
  attrs << 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1;
  const std::vector<bool> mask{true, false, false, true};
  const DenseMatrix pred = kernel_regression_predict(DenseMatrix::Identity(4, 4), attrs, mask);
  CHECK(pred.row(0).isZero());
  CHECK(pred.row(3).isZero());
}

TEST_CASE("regression with uniform attributes") {
  DenseMatrix attrs(5, 3);
  for (Eigen::Index i = 0; i < 5; ++i) attrs.row(i) << 0.2, -0.4, 0.8;
  const std::vector<bool> mask{false, true, false, false, true};
  const DenseMatrix pred = kernel_regression_predict(DenseMatrix::Ones(5, 5), attrs, mask);
  CHECK((pred.row(1) - 3 * attrs.row(0)).norm() < 1e-15);

  DenseMatrix stochastic(5, 5);
  stochastic << 0.1, 0.3, 0.2, 0.4, 0.0, 0.5, 0.0, 0.25, 0.25, 0.0, 0.2, 0.2, 0.2, 0.2, 0.2, 0.0, 0.0,
      1.0, 0.0, 0.0, 0.6, 0.1, 0.1, 0.2, 0.0;
  const DenseMatrix p2 = kernel_regression_predict(stochastic, attrs, mask);
  const Eigen::Vector3d got = p2.row(4).transpose();
  CHECK(got.cross(Eigen::Vector3d(attrs.row(0).transpose())).norm() < 1e-15);

  CHECK_THROWS_AS(kernel_regression_predict(DenseMatrix::Ones(5, 5), attrs, std::vector<bool>(5, true)),
                  InvalidArgument);
}

TEST_CASE("angular error") {
  DenseMatrix truth(2, 3);
  truth << 1, 0, 0, 0, 0.5, 0.5;
  const std::vector<bool> mask{true, true};
  CHECK(angular_error(truth, truth, mask) == doctest::Approx(0.0).scale(1.0));
  DenseMatrix perp(2, 3);
  perp << 0, 1, 0, 1, 0, 0;
  CHECK(angular_error(perp, truth, mask) == doctest::Approx(1.0));
  CHECK(angular_error(-truth, truth, mask) == doctest::Approx(2.0));
  CHECK(angular_error(DenseMatrix::Zero(2, 3), truth, mask) == 1.0);
}

TEST_CASE("random mask") {
  const auto mask = random_mask(100, 0.05, 3);
  CHECK(std::count(mask.begin(), mask.end(), true) == 5);
  CHECK(random_mask(100, 0.05, 3) == mask);
  const auto tiny = random_mask(4, 0.01, 0);
  CHECK(std::count(tiny.begin(), tiny.end(), true) == 1);
}

TEST_CASE("attribute files") {
  DenseMatrix a(2, 3);
  a << 0.1, 0.2, 0.3, -1.0 / 3, 5, 6;
  std::stringstream s;
  write_attributes(s, a);
  CHECK(read_attributes(s) == a);
  std::istringstream bad("1 2\n");
  CHECK_THROWS_AS(read_attributes(bad), ParseError);
}

}
