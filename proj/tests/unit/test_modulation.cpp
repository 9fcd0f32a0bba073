#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "ggrf/errors.hpp"
#include "ggrf/modulation.hpp"

using namespace ggrf;

namespace {

// Test-side references computed directly from the definitions.
long double factorial(int k) {
  long double r = 1;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

long double binom(long double n, int k) {
  long double r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// (2i-1)!! / (2i)!!
long double double_factorial_ratio(int i) {
  long double r = 1;
  for (int j = 1; j <= i; ++j) r *= (2.0L * j - 1) / (2.0L * j);
  return r;
}

}  // namespace

TEST_SUITE("modulation") {

TEST_CASE("taylor coefficients") {
  const CoeffSeq diff = taylor_coeffs(KernelSpec::diffusion(std::sqrt(2.0)), 20);
  for (int k = 0; k <= 20; ++k) {
    CHECK(diff[k] == doctest::Approx(static_cast<double>(1 / factorial(k))).epsilon(1e-14));
  }
  const CoeffSeq reg = taylor_coeffs(KernelSpec::regularised_laplacian(2, 1.0), 10);
  CHECK(reg[1] == 1.0);
  CHECK(reg[2] == 0.75);
  CHECK(reg[3] == 0.5);
  for (int k = 0; k <= 10; ++k) CHECK(reg[k] == doctest::Approx((k + 1) * std::ldexp(1.0, -k)));

  const CoeffSeq pstep = taylor_coeffs(KernelSpec::p_step(3, 3.0), 6);
  for (int k = 0; k <= 6; ++k) {
    CHECK(pstep[k] == doctest::Approx(static_cast<double>(binom(3, k) * std::pow(0.5L, k))));
  }
  for (const auto& spec : {KernelSpec::diffusion(0.3), KernelSpec::inverse_cosine(),
                           KernelSpec::p_step(2, 2.0), KernelSpec::regularised_laplacian(4, 2.0)}) {
    CHECK(taylor_coeffs(spec, 5).is_normalized());
  }
}

TEST_CASE("tail truncation stops below the tolerance") {
  const CoeffSeq c = truncated_taylor_coeffs(KernelSpec::diffusion(1.0), 1e-12, 400);
  CHECK(std::abs(c[c.size() - 1]) < 1e-12);
  CHECK(std::abs(c[c.size() - 2]) >= 1e-12);
}

TEST_CASE("closed-form modulation") {
  const ModulationFn two_reg = closed_form_modulation(KernelSpec::regularised_laplacian(2, 1.0), false);
  for (std::size_t i = 0; i < 12; ++i) CHECK(two_reg(i) == 1.0);

  const ModulationFn diff = closed_form_modulation(KernelSpec::diffusion(std::sqrt(2.0)));
  CHECK(diff(0) == 1.0);
  CHECK(diff(1) == doctest::Approx(0.5));
  CHECK(diff(2) == doctest::Approx(1.0 / 8));
  CHECK(diff(3) == doctest::Approx(1.0 / 48));

  const ModulationFn pstep = closed_form_modulation(KernelSpec::p_step(2, 2.0));
  CHECK(pstep(0) == 1.0);
  CHECK(pstep(1) == 1.0);
  CHECK(pstep(2) == 0.0);
  CHECK(pstep(7) == 0.0);

  const ModulationFn one_reg = closed_form_modulation(KernelSpec::regularised_laplacian(1, 1.0), false);
  const double want[] = {1.0, 0.5, 0.375, 0.3125};
  for (std::size_t i = 0; i < 4; ++i) CHECK(one_reg(i) == doctest::Approx(want[i]).epsilon(1e-15));

  CHECK_THROWS_AS(closed_form_modulation(KernelSpec::inverse_cosine()), InvalidArgument);
}

TEST_CASE("symmetric solver") {
  const ModulationFn id = symmetric_from_coeffs(CoeffSeq({1.0, 0.0, 0.0, 0.0}));
  CHECK(id.prefix(4) == std::vector<double>{1.0, 0.0, 0.0, 0.0});

  // diffusion with sigma^2 = 2: f(i) = 1 / (2^i i!)
  const ModulationFn diff = symmetric_from_coeffs(taylor_coeffs(KernelSpec::diffusion(std::sqrt(2.0)), 30));
  for (int i = 0; i <= 30; ++i) {
    const double want = static_cast<double>(1 / (std::pow(2.0L, i) * factorial(i)));
    CHECK(std::abs(diff(i) - want) <= 1e-12 * want);
  }

  // d = 1, sigma = 1: the scale 1/2 is kept in the coefficients
  const ModulationFn one = symmetric_from_coeffs(taylor_coeffs(KernelSpec::regularised_laplacian(1, 1.0), 30));
  for (int i = 0; i <= 30; ++i) {
    const double want = static_cast<double>(double_factorial_ratio(i) * std::pow(0.5L, i));
    CHECK(one(i) == doctest::Approx(want).epsilon(1e-12));
  }

  CHECK_THROWS_AS(symmetric_from_coeffs(CoeffSeq({2.0, 1.0})), InvalidArgument);
}

TEST_CASE("convolution") {
  const ModulationFn diff = closed_form_modulation(KernelSpec::diffusion(std::sqrt(2.0)));
  const auto c = convolve(diff, diff, 15);
  for (int k = 0; k <= 15; ++k) {
    CHECK(c[k] == doctest::Approx(static_cast<double>(1 / factorial(k))).epsilon(1e-13));
  }
  const ModulationFn b1 = ModulationFn::tabulated({1.0, 1.0});
  CHECK(convolve(b1, b1, 4) == std::vector<double>{1.0, 2.0, 1.0, 0.0, 0.0});

  const ModulationFn one = ModulationFn::tabulated(std::vector<double>(10, 1.0));
  const auto ramp = convolve(one, one, 9);
  for (int k = 0; k <= 9; ++k) CHECK(ramp[k] == k + 1);
}

TEST_CASE("scaled and lazy") {
  const ModulationFn f = ModulationFn::tabulated({1.0, 2.0, 3.0}).scaled(0.5);
  CHECK(f(0) == 1.0);
  CHECK(f(1) == 1.0);
  CHECK(f(2) == 0.75);
  CHECK(f(3) == 0.0);
  const ModulationFn lazy = ModulationFn::lazy(2.5);
  CHECK(lazy(0) == 2.5);
  CHECK(lazy(1) == 0.0);
}

TEST_CASE("batch size") {
  CHECK(min_batch_size(1, 0.5, 0.5) == 1);
  CHECK(min_batch_size(100, 0.5, 0.01) == 14);
  for (std::size_t m : {1u, 10u, 1000u}) {
    for (double p : {0.1, 0.5, 0.9}) {
      const std::size_t b = min_batch_size(m, p, 1e-3);
      CHECK(std::pow(1 - std::pow(1 - p, static_cast<double>(b)), static_cast<double>(m)) >= 1 - 1e-3);
      if (b > 1) {
        CHECK(std::pow(1 - std::pow(1 - p, static_cast<double>(b - 1)), static_cast<double>(m)) < 1 - 1e-3);
      }
    }
  }
}

TEST_CASE("rademacher bound") {
  CHECK(rademacher_bound(std::vector<double>{1.0, 0.0, 0.0}, 3.0, 1) == 1.0);
  const double c = 2.0;
  const double rho = 0.3;
  std::vector<double> bounds;
  for (int i = 0; i < 200; ++i) bounds.push_back(std::pow(c, i));
  CHECK(rademacher_bound(bounds, rho, 5) == doctest::Approx(std::sqrt(1 / (5 * (1 - c * rho)))));
  CHECK_THROWS_AS(rademacher_bound(std::vector<double>(5, 1.0), 1.5, 1), NumericalError);
}

TEST_CASE("tabulated round trip") {
  const std::vector<double> v{1.0, 0.1, 1.0 / 3, -2e-300};
  std::stringstream s;
  write_tabulated(s, v);
  CHECK(read_tabulated(s) == v);
}

}
