#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "ggrf/errors.hpp"
#include "ggrf/estimator.hpp"
#include "ggrf/exact_oracle.hpp"
#include "ggrf/generators.hpp"

using namespace ggrf;

TEST_SUITE("exact-oracle") {

TEST_CASE("taylor kernel basics") {
  const DenseMatrix zero = DenseMatrix::Zero(3, 3);
  const auto r0 = taylor_kernel(zero, taylor_coeffs(KernelSpec::diffusion(1.0), 10));
  CHECK((r0.value - DenseMatrix::Identity(3, 3)).norm() == 0.0);

  DenseMatrix w(2, 2);
  w << 0.1, 0.3, -0.2, 0.4;
  const auto lin = taylor_kernel(w, CoeffSeq({1.0, 1.0}));
  CHECK((lin.value - (DenseMatrix::Identity(2, 2) + w)).norm() < 1e-15);
}

TEST_CASE("diffusion series on a pair matches cosh and sinh") {
  const double a = 0.9;
  DenseMatrix w(2, 2);
  w << 0, a, a, 0;
  CoeffSeq c = taylor_coeffs(KernelSpec::diffusion(std::sqrt(2.0)), 60);
  const DenseMatrix k = taylor_kernel(w, c).value;
  CHECK(k(0, 0) == doctest::Approx(std::cosh(a)).epsilon(1e-13));
  CHECK(k(0, 1) == doctest::Approx(std::sinh(a)).epsilon(1e-13));
  CHECK((expm(w) - k).norm() < 1e-13);
}

TEST_CASE("divergence is reported") {
  DenseMatrix w = 2.0 * DenseMatrix::Identity(2, 2);
  CHECK_THROWS_AS(taylor_kernel(w, CoeffSeq(std::vector<double>(40, 1.0))), NumericalError);
}

TEST_CASE("closed forms on tiny graphs") {
  const Graph lone = Graph::from_edges(1, std::vector<WeightedEdge>{}, false);
  CHECK(exact_kernel(lone, KernelSpec::regularised_laplacian(2, 1.0))(0, 0) == doctest::Approx(0.25));

  const Graph empty = Graph::from_edges(4, std::vector<WeightedEdge>{}, false);
  const DenseMatrix k = exact_kernel(empty, KernelSpec::diffusion(0.8));
  CHECK((k - std::exp(-0.32) * DenseMatrix::Identity(4, 4)).norm() < 1e-14);
}

TEST_CASE("closed forms agree with their series") {
  const Graph g = erdos_renyi(25, 0.2, 3);
  const DenseMatrix w = normalized_adjacency(g).to_dense();
  for (const auto& spec : {KernelSpec::regularised_laplacian(2, 0.8), KernelSpec::p_step(3, 2.5),
                           KernelSpec::diffusion(1.0), KernelSpec::inverse_cosine()}) {
    const DenseMatrix series = spec.prefactor() * taylor_kernel(w, truncated_taylor_coeffs(spec)).value;
    const DenseMatrix closed = exact_kernel(g, spec);
    CHECK(relative_frobenius_error(closed, series) < 1e-8);
    CHECK(min_eigenvalue(closed) >= -1e-10);
  }
}

TEST_CASE("inverse cosine is the real part of exp(iM)") {
  Eigen::Matrix3d m;
  m << 0.3, -0.7, 0.2, -0.7, 1.1, 0.5, 0.2, 0.5, -0.4;
  const Eigen::MatrixXcd e = expm_complex(std::complex<double>(0, 1) * m.cast<std::complex<double>>());
  // cos(M) from its own alternating series
  DenseMatrix cos_m = DenseMatrix::Zero(3, 3);
  DenseMatrix term = DenseMatrix::Identity(3, 3);
  for (int k = 0; k < 40; ++k) {
    cos_m += term;
    term = -term * m * m / ((2.0 * k + 1) * (2.0 * k + 2));
  }
  CHECK((e.real() - cos_m).norm() < 1e-12);
}

TEST_CASE("matrix exponential of a rotation generator") {
  DenseMatrix a(2, 2);
  a << 0, -3.0, 3.0, 0;
  const DenseMatrix e = expm(a);
  CHECK(e(0, 0) == doctest::Approx(std::cos(3.0)).epsilon(1e-12));
  CHECK(e(1, 0) == doctest::Approx(std::sin(3.0)).epsilon(1e-12));
}

TEST_CASE("minimum eigenvalue") {
  DenseMatrix m(2, 2);
  m << 2, 1, 1, 2;
  CHECK(min_eigenvalue(m) == doctest::Approx(1.0));
}

}
