#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ggrf/graph.hpp"
#include "ggrf/kernel_spec.hpp"

namespace ggrf {

/// Which matrix plays W in dx/dt = W x + y(t).
///   neg_laplacian  W = -L = W~ - I   (heat flow; the usual choice)
///   laplacian      W = L = I - W~
///   raw            W = the stored weighted adjacency
enum class OdeOperator { neg_laplacian, laplacian, raw };

std::string to_string(OdeOperator op);
OdeOperator parse_ode_operator(std::string_view name);

/// Drive sampled at increasing times; linearly interpolated, held constant
/// outside the sampled range.
struct TimeSeriesDrive {
  std::vector<double> times;
  std::vector<std::vector<double>> values;
};

struct OdeProblem {
  Graph graph;
  OdeOperator op = OdeOperator::neg_laplacian;
  std::variant<std::vector<double>, TimeSeriesDrive> drive;
  double horizon = 1.0;
  std::size_t n_samples = 10;  // Monte-Carlo samples of tau, uniform on [0, horizon]

  void validate() const;
  std::vector<double> drive_at(double tau) const;
  double density(double /*tau*/) const { return 1.0 / horizon; }
};

/// Dense W for the problem's operator choice.
DenseMatrix ode_operator_matrix(const OdeProblem& p);

/// The graph actually walked for the operator: W~ for the Laplacian forms, the
/// stored adjacency for `raw`.
Graph ode_walk_graph(const OdeProblem& p);

/// x(t) = int_0^t exp(W (t - tau)) Z y(tau) dtau by the trapezoidal rule on
/// n_quad equally spaced nodes, x(0) = 0. Z is the identity, or the normalised
/// series of `drive_kernel` on the walked matrix.
std::vector<double> simulate_exact(const OdeProblem& p, std::size_t n_quad,
                                   const std::optional<KernelSpec>& drive_kernel = std::nullopt);

struct OdeGrfConfig {
  std::size_t m = 16;
  double p_halt = 0.1;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

/// Monte-Carlo estimate (1/n) sum_j (1/p(tau_j)) A_j (B_j^T Z y(tau_j)) with a
/// fresh g-GRF pair (A_j, B_j) for exp(W (t - tau_j)) per sample and, when
/// `drive_kernel` is given, a fresh pair for Z as well.
std::vector<double> simulate_grf(const OdeProblem& p, const OdeGrfConfig& cfg,
                                 const std::optional<KernelSpec>& drive_kernel = std::nullopt);

/// Uniform tau samples used by simulate_grf for this seed.
std::vector<double> ode_tau_samples(const OdeProblem& p, std::uint64_t seed);

}  // namespace ggrf
