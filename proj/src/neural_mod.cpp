#include "ggrf/neural_mod.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "ggrf/applications.hpp"
#include "ggrf/errors.hpp"
#include "ggrf/rng.hpp"

namespace ggrf {

namespace {

double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }
double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// d loss / d params from d loss / d f(l).
std::array<double, 4> chain(const NeuralModParams& p, const std::vector<double>& dloss_df) {
  std::array<double, 4> out{};
  std::array<double, 4> g{};
  for (std::size_t l = 0; l < dloss_df.size(); ++l) {
    if (dloss_df[l] == 0.0) continue;
    neural_mod_eval(p, static_cast<double>(l), g);
    for (int k = 0; k < 4; ++k) out[static_cast<std::size_t>(k)] += dloss_df[l] * g[static_cast<std::size_t>(k)];
  }
  return out;
}

struct Combined {
  DenseMatrix phi1;
  DenseMatrix phi2;
};

Combined combine_pair(const LengthFeatureTensor& t1, const LengthFeatureTensor& t2,
                      const NeuralModParams& f1, const NeuralModParams& f2) {
  if (t1.n() != t2.n()) throw InvalidArgument("walk tensors differ in size");
  return {t1.combine_dense(neural_mod_table(f1, t1.max_length() + 1)),
          t2.combine_dense(neural_mod_table(f2, t2.max_length() + 1))};
}

LossAndGrad finish(double loss, const LengthFeatureTensor& t1, const LengthFeatureTensor& t2,
                   const NeuralModParams& f1, const NeuralModParams& f2, const DenseMatrix& d_phi1,
                   const DenseMatrix& d_phi2) {
  LossAndGrad out;
  out.loss = loss;
  out.grad1 = chain(f1, t1.contract(d_phi1));
  out.grad2 = chain(f2, t2.contract(d_phi2));
  return out;
}

}  // namespace

double neural_mod_eval(const NeuralModParams& p, double x) {
  const double h = std::max(0.0, p.w1 * x + p.b1);
  return softplus(p.w2 * h + p.b2);
}

double neural_mod_eval(const NeuralModParams& p, double x, std::array<double, 4>& grad) {
  const double z = p.w1 * x + p.b1;
  const double h = std::max(0.0, z);
  const double u = p.w2 * h + p.b2;
  const double s = sigmoid(u);
  const double active = z > 0.0 ? 1.0 : 0.0;
  grad = {s * p.w2 * active * x, s * p.w2 * active, s * h, s};
  return softplus(u);
}

std::vector<double> neural_mod_table(const NeuralModParams& p, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = neural_mod_eval(p, static_cast<double>(i));
  return out;
}

ModulationFn to_modulation(const NeuralModParams& p) {
  return ModulationFn::from_function([p](std::size_t i) { return neural_mod_eval(p, static_cast<double>(i)); },
                                     "neural");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("decay gamma must lie in (0, 1]");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0)) {
    throw InvalidArgument("invalid Adam constants");
  }
  WalkConfig{p_halt, m, sigma, seed, threads}.validate();
  for (double v : init.as_array()) {
    if (!std::isfinite(v)) throw InvalidArgument("initial parameters must be finite");
  }
  if (const auto* a = std::get_if<AngularLoss>(&loss)) {
    if (a->attrs.cols() != 3) throw InvalidArgument("angular loss needs N x 3 attributes");
    if (!(a->holdout > 0.0 && a->holdout < 1.0)) throw InvalidArgument("holdout fraction outside (0, 1)");
  }
}

LossAndGrad frobenius_loss_grad(const LengthFeatureTensor& t1, const LengthFeatureTensor& t2,
                                const NeuralModParams& f1, const NeuralModParams& f2,
                                const DenseMatrix& target) {
  const auto n = static_cast<Eigen::Index>(t1.n());
  if (target.rows() != n || target.cols() != n) throw InvalidArgument("target Gram matrix has the wrong shape");
  const double k_norm = target.norm();
  if (!(k_norm > 0.0)) throw InvalidArgument("target Gram matrix has zero norm");
  const auto [phi1, phi2] = combine_pair(t1, t2, f1, f2);
  const DenseMatrix err = phi1 * phi2.transpose() - target;
  const double e_norm = err.norm();
  const double loss = e_norm / k_norm;
  if (e_norm == 0.0) return {loss, {}, {}};
  const DenseMatrix g = err / (e_norm * k_norm);
  return finish(loss, t1, t2, f1, f2, g * phi2, g.transpose() * phi1);
}

LossAndGrad angular_loss_grad(const LengthFeatureTensor& t1, const LengthFeatureTensor& t2,
                              const NeuralModParams& f1, const NeuralModParams& f2,
                              const DenseMatrix& attrs, const std::vector<bool>& mask) {
  const auto n = static_cast<Eigen::Index>(t1.n());
  if (attrs.rows() != n || static_cast<Eigen::Index>(mask.size()) != n) {
    throw InvalidArgument("attributes and mask must have one row per node");
  }
  const auto [phi1, phi2] = combine_pair(t1, t2, f1, f2);
  DenseMatrix v0 = attrs;
  std::size_t masked = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask[static_cast<std::size_t>(i)]) {
      v0.row(i).setZero();
      ++masked;
    }
  }
  if (masked == 0 || masked == mask.size()) throw InvalidArgument("mask must hold out some but not all nodes");
  const DenseMatrix inner = phi2.transpose() * v0;  // Phi2^T V0
  const DenseMatrix pred = phi1 * inner;
  const double loss = angular_error(pred, attrs, mask);
  DenseMatrix d_pred = DenseMatrix::Zero(n, attrs.cols());
  const double scale = 1.0 / static_cast<double>(masked);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const Eigen::RowVectorXd p = pred.row(i);
    const Eigen::RowVectorXd t = attrs.row(i);
    const double pn = p.norm();
    if (pn == 0.0) continue;
    const double tn = t.norm();
    const double cosine = p.dot(t) / (pn * tn);
    d_pred.row(i) = -scale * (t / (pn * tn) - cosine * p / (pn * pn));
  }
  // K^ = Phi1 Phi2^T, pred = K^ V0.
  return finish(loss, t1, t2, f1, f2, d_pred * inner.transpose(), v0 * (d_pred.transpose() * phi1));
}

TrainResult train_modulation(const Graph& walk_graph, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t n = walk_graph.num_nodes();
  if (const auto* fro = std::get_if<FrobeniusLoss>(&cfg.loss)) {
    if (static_cast<std::size_t>(fro->target.rows()) != n) {
      throw InvalidArgument("target Gram matrix does not match the graph size");
    }
  } else if (static_cast<std::size_t>(std::get<AngularLoss>(cfg.loss).attrs.rows()) != n) {
    throw InvalidArgument("attribute rows do not match the graph size");
  }
  TrainResult result;
  result.asymmetric = cfg.asymmetric;
  result.f1 = cfg.init;
  result.f2 = cfg.init;
  const std::size_t dim = cfg.asymmetric ? 8 : 4;
  std::vector<double> m1(dim, 0.0);
  std::vector<double> m2(dim, 0.0);
  const std::size_t l_max = min_batch_size(std::max<std::size_t>(1, cfg.m * n), cfg.p_halt, 1e-4);
  double lr = cfg.learning_rate;
  double b1_pow = 1.0;
  double b2_pow = 1.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const WalkConfig wc{cfg.p_halt, cfg.m, cfg.sigma, derive_seed(cfg.seed, epoch), cfg.threads};
    const auto [t1, t2] = sample_length_feature_pair(walk_graph, wc, l_max);
    LossAndGrad lg;
    if (const auto* fro = std::get_if<FrobeniusLoss>(&cfg.loss)) {
      lg = frobenius_loss_grad(t1, t2, result.f1, result.f2, fro->target);
    } else {
      const auto& ang = std::get<AngularLoss>(cfg.loss);
      const auto mask = random_mask(n, ang.holdout, derive_seed(cfg.seed, epoch, 0xa5));
      lg = angular_loss_grad(t1, t2, result.f1, result.f2, ang.attrs, mask);
    }
    std::vector<double> grad(dim);
    for (std::size_t k = 0; k < 4; ++k) {
      if (cfg.asymmetric) {
        grad[k] = lg.grad1[k];
        grad[k + 4] = lg.grad2[k];
      } else {
        grad[k] = lg.grad1[k] + lg.grad2[k];
      }
    }
    bool finite = std::isfinite(lg.loss);
    for (double g : grad) finite = finite && std::isfinite(g);
    if (!finite) {
      result.abort_reason = "non-finite loss or gradient at epoch " + std::to_string(epoch);
      break;
    }
    result.trace.push_back(lg.loss);
    b1_pow *= cfg.beta1;
    b2_pow *= cfg.beta2;
    auto a1 = result.f1.as_array();
    auto a2 = result.f2.as_array();
    for (std::size_t k = 0; k < dim; ++k) {
      m1[k] = cfg.beta1 * m1[k] + (1.0 - cfg.beta1) * grad[k];
      m2[k] = cfg.beta2 * m2[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
      const double step = lr * (m1[k] / (1.0 - b1_pow)) / (std::sqrt(m2[k] / (1.0 - b2_pow)) + cfg.epsilon);
      if (k < 4) {
        a1[k] -= step;
      } else {
        a2[k - 4] -= step;
      }
    }
    result.f1 = NeuralModParams::from_array(a1);
    result.f2 = cfg.asymmetric ? NeuralModParams::from_array(a2) : result.f1;
    lr *= cfg.gamma;
  }
  return result;
}

std::vector<double> implied_coefficients(const NeuralModParams& f, std::size_t k_max) {
  return implied_coefficients(f, f, k_max);
}

std::vector<double> implied_coefficients(const NeuralModParams& f1, const NeuralModParams& f2,
                                         std::size_t k_max) {
  return convolve(to_modulation(f1), to_modulation(f2), k_max);
}

namespace {

nlohmann::json params_json(const NeuralModParams& p) {
  return {{"w1", p.w1}, {"b1", p.b1}, {"w2", p.w2}, {"b2", p.b2}};
}

NeuralModParams params_from_json(const nlohmann::json& j) {
  NeuralModParams p{j.at("w1").get<double>(), j.at("b1").get<double>(), j.at("w2").get<double>(),
                    j.at("b2").get<double>()};
  for (double v : p.as_array()) {
    if (!std::isfinite(v)) throw ParseError("non-finite modulation parameter", 0);
  }
  return p;
}

}  // namespace

void write_params_json(std::ostream& out, const TrainResult& result) {
  nlohmann::json j{{"asymmetric", result.asymmetric},
                   {"f1", params_json(result.f1)},
                   {"f2", params_json(result.f2)}};
  if (result.abort_reason) j["abort_reason"] = *result.abort_reason;
  out << j.dump(2) << '\n';
}

TrainResult read_params_json(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    TrainResult r;
    r.asymmetric = j.value("asymmetric", false);
    r.f1 = params_from_json(j.at("f1"));
    r.f2 = j.contains("f2") ? params_from_json(j.at("f2")) : r.f1;
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid parameter JSON: ") + e.what(), 0);
  }
}

void write_trace_csv(std::ostream& out, const std::vector<double>& trace) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < trace.size(); ++e) out << e << ',' << trace[e] << '\n';
  out.precision(old_precision);
}

}  // namespace ggrf
