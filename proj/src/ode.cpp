#include "ggrf/ode.hpp"

#include <algorithm>
#include <cmath>

#include "ggrf/errors.hpp"
#include "ggrf/estimator.hpp"
#include "ggrf/exact_oracle.hpp"
#include "ggrf/modulation.hpp"
#include "ggrf/rng.hpp"
#include "ggrf/walker.hpp"

namespace ggrf {

std::string to_string(OdeOperator op) {
  switch (op) {
    case OdeOperator::neg_laplacian:
      return "neg-laplacian";
    case OdeOperator::laplacian:
      return "laplacian";
    case OdeOperator::raw:
      return "raw";
  }
  return "unknown";
}

OdeOperator parse_ode_operator(std::string_view name) {
  if (name == "neg-laplacian" || name == "neg_laplacian") return OdeOperator::neg_laplacian;
  if (name == "laplacian") return OdeOperator::laplacian;
  if (name == "raw") return OdeOperator::raw;
  throw InvalidArgument("unknown ODE operator '" + std::string(name) +
                        "' (expected laplacian, neg-laplacian or raw)");
}

void OdeProblem::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("ODE horizon must be > 0");
  if (n_samples < 1) throw InvalidArgument("ODE needs at least one Monte-Carlo sample");
  const std::size_t n = graph.num_nodes();
  if (const auto* y = std::get_if<std::vector<double>>(&drive)) {
    if (y->size() != n) {
      throw InvalidArgument("drive vector has " + std::to_string(y->size()) +
                            " entries, graph has " + std::to_string(n) + " nodes");
    }
    return;
  }
  const auto& ts = std::get<TimeSeriesDrive>(drive);
  if (ts.times.empty() || ts.times.size() != ts.values.size()) {
    throw InvalidArgument("time-series drive needs one value vector per time");
  }
  for (std::size_t k = 0; k < ts.times.size(); ++k) {
    if (ts.values[k].size() != n) throw InvalidArgument("time-series drive dimension mismatch");
    if (k > 0 && !(ts.times[k] > ts.times[k - 1])) {
      throw InvalidArgument("time-series drive times must be strictly increasing");
    }
  }
}

std::vector<double> OdeProblem::drive_at(double tau) const {
  if (const auto* y = std::get_if<std::vector<double>>(&drive)) return *y;
  const auto& ts = std::get<TimeSeriesDrive>(drive);
  if (tau <= ts.times.front()) return ts.values.front();
  if (tau >= ts.times.back()) return ts.values.back();
  const auto hi = static_cast<std::size_t>(
      std::upper_bound(ts.times.begin(), ts.times.end(), tau) - ts.times.begin());
  const std::size_t lo = hi - 1;
  const double w = (tau - ts.times[lo]) / (ts.times[hi] - ts.times[lo]);
  std::vector<double> out(ts.values[lo].size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - w) * ts.values[lo][i] + w * ts.values[hi][i];
  }
  return out;
}

Graph ode_walk_graph(const OdeProblem& p) {
  return p.op == OdeOperator::raw ? p.graph : normalized_adjacency(p.graph);
}

DenseMatrix ode_operator_matrix(const OdeProblem& p) {
  switch (p.op) {
    case OdeOperator::neg_laplacian:
      return -laplacian_as_operator(p.graph).to_dense();
    case OdeOperator::laplacian:
      return laplacian_as_operator(p.graph).to_dense();
    case OdeOperator::raw:
      return p.graph.to_dense();
  }
  throw InvalidArgument("unknown ODE operator");
}

namespace {

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::vector<double> simulate_exact(const OdeProblem& p, std::size_t n_quad,
                                   const std::optional<KernelSpec>& drive_kernel) {
  p.validate();
  if (n_quad < 2) throw InvalidArgument("simulate_exact: need at least 2 quadrature nodes");
  const DenseMatrix w = ode_operator_matrix(p);
  std::optional<DenseMatrix> z;
  if (drive_kernel) z = operator_kernel(ode_walk_graph(p).to_dense(), *drive_kernel);
  const double h = p.horizon / static_cast<double>(n_quad - 1);
  const DenseMatrix step = expm(h * w);
  // s_k = E s_{k-1} + w_k y(tau_k), so s_last = sum_k w_k exp(W (t - tau_k)) y(tau_k).
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(w.rows());
  for (std::size_t k = 0; k < n_quad; ++k) {
    const double tau = static_cast<double>(k) * h;
    Eigen::VectorXd y = to_eigen(p.drive_at(tau));
    if (z) y = *z * y;
    const double weight = (k == 0 || k + 1 == n_quad) ? 0.5 * h : h;
    acc = (k == 0 ? Eigen::VectorXd(weight * y) : Eigen::VectorXd(step * acc + weight * y));
  }
  return {acc.data(), acc.data() + acc.size()};
}

std::vector<double> ode_tau_samples(const OdeProblem& p, std::uint64_t seed) {
  std::vector<double> taus(p.n_samples);
  for (std::size_t j = 0; j < p.n_samples; ++j) {
    StreamRng rng(derive_seed(seed, j, 0));
    taus[j] = p.horizon * rng.uniform();
  }
  return taus;
}

std::vector<double> simulate_grf(const OdeProblem& p, const OdeGrfConfig& cfg,
                                 const std::optional<KernelSpec>& drive_kernel) {
  p.validate();
  const std::size_t n = p.graph.num_nodes();
  const Graph walk = ode_walk_graph(p);
  // exp(s W~) and exp(-s W~) carry the Laplacian's identity part as e^{-s} / e^{s}.
  const double direction = p.op == OdeOperator::laplacian ? -1.0 : 1.0;
  const ModulationFn heat = closed_form_modulation(KernelSpec::diffusion(1.0), /*absorb_scale=*/false);
  std::optional<ModulationFn> z_mod;
  if (drive_kernel) z_mod = kernel_modulation(*drive_kernel);

  const auto taus = ode_tau_samples(p, cfg.seed);
  std::vector<double> x(n, 0.0);
  for (std::size_t j = 0; j < p.n_samples; ++j) {
    const double tau = taus[j];
    const double s = p.horizon - tau;
    std::vector<double> y = p.drive_at(tau);
    if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) continue;
    WalkConfig wc{cfg.p_halt, cfg.m, 1.0, derive_seed(cfg.seed, j, 1), cfg.threads};
    if (z_mod) {
      WalkConfig zc = wc;
      zc.seed = derive_seed(cfg.seed, j, 2);
      const auto [z1, z2] = sample_feature_pair(walk, *z_mod, *z_mod, zc);
      y = kernel_matvec(z1, z2, y);
    }
    const ModulationFn f = heat.scaled(direction * s);
    const auto [a, b] = sample_feature_pair(walk, f, f, wc);
    const auto v = kernel_matvec(a, b, y);
    double shift = 1.0;
    if (p.op == OdeOperator::neg_laplacian) shift = std::exp(-s);
    if (p.op == OdeOperator::laplacian) shift = std::exp(s);
    const double weight = shift / (p.density(tau) * static_cast<double>(p.n_samples));
    for (std::size_t i = 0; i < n; ++i) x[i] += weight * v[i];
  }
  return x;
}

}  // namespace ggrf
