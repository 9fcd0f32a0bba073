#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ggrf/graph.hpp"
#include "ggrf/modulation.hpp"
#include "ggrf/walker.hpp"

namespace ggrf {

/// f(x) = softplus(w2 relu(w1 x + b1) + b2).
struct NeuralModParams {
  double w1 = -0.5;
  double b1 = 1.0;
  double w2 = 1.0;
  double b2 = 0.0;

  std::array<double, 4> as_array() const { return {w1, b1, w2, b2}; }
  static NeuralModParams from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }
  bool operator==(const NeuralModParams&) const = default;
};

double neural_mod_eval(const NeuralModParams& p, double x);

/// Value plus d f / d(w1, b1, w2, b2). At the ReLU kink the left derivative (0) is used.
double neural_mod_eval(const NeuralModParams& p, double x, std::array<double, 4>& grad);

/// (f(0), ..., f(n - 1)).
std::vector<double> neural_mod_table(const NeuralModParams& p, std::size_t n);

ModulationFn to_modulation(const NeuralModParams& p);

/// Relative Frobenius error against a fixed target Gram matrix.
struct FrobeniusLoss {
  DenseMatrix target;
};

/// Mean angular error of unnormalised kernel regression on a random held-out
/// fraction of nodes, redrawn every epoch.
struct AngularLoss {
  DenseMatrix attrs;
  double holdout = 0.05;
};

using TrainLoss = std::variant<FrobeniusLoss, AngularLoss>;

struct TrainConfig {
  double learning_rate = 0.01;
  double gamma = 0.975;  // learning rate multiplier per epoch
  std::size_t epochs = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t m = 16;
  double p_halt = 0.5;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool asymmetric = false;
  NeuralModParams init{};
  TrainLoss loss;

  void validate() const;
};

struct TrainResult {
  NeuralModParams f1;
  NeuralModParams f2;  // equals f1 unless asymmetric
  bool asymmetric = false;
  std::vector<double> trace;  // loss before the update of each epoch
  std::optional<std::string> abort_reason;
};

struct LossAndGrad {
  double loss = 0.0;
  std::array<double, 4> grad1{};  // w.r.t. the parameters modulating t1
  std::array<double, 4> grad2{};  // w.r.t. the parameters modulating t2
};

/// Loss and analytic gradients for frozen walk tensors; K^ = Phi1 Phi2^T with
/// Phi_a = sum_l f_a(l) Phi_a^(l).
LossAndGrad frobenius_loss_grad(const LengthFeatureTensor& t1, const LengthFeatureTensor& t2,
                                const NeuralModParams& f1, const NeuralModParams& f2,
                                const DenseMatrix& target);
LossAndGrad angular_loss_grad(const LengthFeatureTensor& t1, const LengthFeatureTensor& t2,
                              const NeuralModParams& f1, const NeuralModParams& f2,
                              const DenseMatrix& attrs, const std::vector<bool>& mask);

/// Adam on the four (or eight, when asymmetric) parameters. The walks are
/// resampled every epoch from a seed derived from cfg.seed and the epoch.
/// `walk_graph` is walked as given with cfg.sigma folded into each step.
TrainResult train_modulation(const Graph& walk_graph, const TrainConfig& cfg);

/// The coefficients the learned pair estimates without bias: f1 * f2.
std::vector<double> implied_coefficients(const NeuralModParams& f, std::size_t k_max);
std::vector<double> implied_coefficients(const NeuralModParams& f1, const NeuralModParams& f2,
                                         std::size_t k_max);

/// {"asymmetric": bool, "f1": {"w1":..,"b1":..,"w2":..,"b2":..}, "f2": {...}}
void write_params_json(std::ostream& out, const TrainResult& result);
TrainResult read_params_json(std::istream& in);

/// epoch,loss
void write_trace_csv(std::ostream& out, const std::vector<double>& trace);

}  // namespace ggrf
