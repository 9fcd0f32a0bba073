#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ggrf/exact_oracle.hpp"
#include "ggrf/generators.hpp"
#include "ggrf/neural_mod.hpp"

using namespace ggrf;

TEST_SUITE("neural-mod") {

TEST_CASE("evaluation") {
  const NeuralModParams relu{1, 0, 1, 0};
  CHECK(neural_mod_eval(relu, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(neural_mod_eval(relu, 1) == doctest::Approx(std::log1p(std::exp(1.0))).epsilon(1e-15));
  const NeuralModParams dead{3, -1, 0, 0.4};
  for (double x : {0.0, 1.0, 9.0}) CHECK(neural_mod_eval(dead, x) == doctest::Approx(std::log1p(std::exp(0.4))));
  CHECK(neural_mod_eval({0, 0, 1, 800}, 0) == 800.0);
}

TEST_CASE("gradient against finite differences") {
  const NeuralModParams p{-0.3, 1.2, 0.8, -0.1};
  for (double x : {0.0, 1.0, 3.0}) {
    std::array<double, 4> grad{};
    neural_mod_eval(p, x, grad);
    for (std::size_t k = 0; k < 4; ++k) {
      auto hi = p.as_array();
      auto lo = p.as_array();
      hi[k] += 1e-6;
      lo[k] -= 1e-6;
      const double fd = (neural_mod_eval(NeuralModParams::from_array(hi), x) -
                         neural_mod_eval(NeuralModParams::from_array(lo), x)) / 2e-6;
      CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("implied coefficients") {
  // softplus(b2) = 1 when b2 = ln(e - 1)
  const NeuralModParams one{0, 0, 0, std::log(std::exp(1.0) - 1)};
  const auto a = implied_coefficients(one, 6);
  for (std::size_t k = 0; k <= 6; ++k) CHECK(a[k] == doctest::Approx(k + 1.0));

  // steep decay approximates the lazy walker
  const NeuralModParams lazy{-60, 20, 1, -20};
  const auto l = implied_coefficients(lazy, 3);
  const double c = neural_mod_eval(lazy, 0);
  CHECK(l[0] == doctest::Approx(c * c));
  CHECK(std::abs(l[1]) < 1e-6);
}

TEST_CASE("zero epochs return the initialisation") {
  const Graph g = erdos_renyi(8, 0.5, 1);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.init = {0.1, 0.2, 0.3, 0.4};
  cfg.loss = FrobeniusLoss{exact_kernel(g, KernelSpec::diffusion(1.0))};
  const TrainResult r = train_modulation(normalized_adjacency(g), cfg);
  CHECK(r.f1 == cfg.init);
  CHECK(r.trace.empty());
}

TEST_CASE("training is reproducible and lowers the loss") {
  const Graph g = erdos_renyi(12, 0.4, 2);
  const KernelSpec spec = KernelSpec::diffusion(1.0);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.learning_rate = 0.05;
  cfg.sigma = spec.scale();
  cfg.seed = 5;
  cfg.loss = FrobeniusLoss{operator_kernel(normalized_adjacency(g).to_dense(), spec)};
  const TrainResult a = train_modulation(normalized_adjacency(g), cfg);
  const TrainResult b = train_modulation(normalized_adjacency(g), cfg);
  CHECK(a.f1 == b.f1);
  CHECK(a.trace == b.trace);
  REQUIRE(a.trace.size() == 40);
  CHECK(a.trace.back() < a.trace.front());
}

TEST_CASE("params json round trip") {
  TrainResult r;
  r.asymmetric = true;
  r.f1 = {0.1, -0.2, 1.0 / 3, 4};
  r.f2 = {5, 6, 7, 8};
  std::stringstream s;
  write_params_json(s, r);
  const TrainResult back = read_params_json(s);
  CHECK(back.asymmetric);
  CHECK(back.f1 == r.f1);
  CHECK(back.f2 == r.f2);
}

}
