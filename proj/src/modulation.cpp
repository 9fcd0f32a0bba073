#include "ggrf/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "ggrf/errors.hpp"

namespace ggrf {

CoeffSeq::CoeffSeq(std::vector<double> values, std::vector<double> low)
    : values_(std::move(values)), low_(std::move(low)) {
  if (low_.size() != values_.size()) throw InvalidArgument("CoeffSeq: value and residual lengths differ");
}

bool CoeffSeq::is_normalized(double tol) const {
  return !values_.empty() && std::abs(values_[0] - 1.0) <= tol;
}

struct ModulationFn::State {
  Evaluator eval;
  LogEvaluator log_eval;  // set for closed forms only
  std::string description;
  std::mutex mutex;
  std::vector<double> cache;
};

namespace {

double from_log(ModulationFn::LogValue v) {
  return v.sign == 0 ? 0.0 : v.sign * std::exp(v.log_abs);
}

// log |prod_{j<i} (a - j)| and its sign; exact zero when a is a non-negative
// integer smaller than i.
ModulationFn::LogValue falling_factorial(double a, std::size_t i) {
  ModulationFn::LogValue out{1, 0.0};
  for (std::size_t j = 0; j < i; ++j) {
    const double term = a - static_cast<double>(j);
    if (term == 0.0) return {0, 0.0};
    if (term < 0.0) out.sign = -out.sign;
    out.log_abs += std::log(std::abs(term));
  }
  return out;
}

// Generalised binomial coefficient binom(a, i) in log space.
ModulationFn::LogValue log_binomial(double a, std::size_t i) {
  auto v = falling_factorial(a, i);
  if (v.sign != 0) v.log_abs -= std::lgamma(static_cast<double>(i) + 1.0);
  return v;
}

// Unscaled symmetric modulation of each closed-form kernel.
ModulationFn::LogValue closed_form_base(const KernelSpec& spec, std::size_t i) {
  const double x = static_cast<double>(i);
  switch (spec.kind) {
    case KernelKind::regularised_laplacian: {
      // (d - 2 + 2i)!! / ((2i)!! (d - 2)!!) = Gamma(d/2 + i) / (Gamma(d/2) i!)
      const double h = spec.d / 2.0;
      return {1, std::lgamma(h + x) - std::lgamma(h) - std::lgamma(x + 1.0)};
    }
    case KernelKind::p_step_random_walk:
      return log_binomial(spec.p / 2.0, i);
    case KernelKind::diffusion:
      return {1, -x * std::numbers::ln2 - std::lgamma(x + 1.0)};
    case KernelKind::inverse_cosine:
      break;
  }
  throw InvalidArgument("no closed-form modulation for " + to_string(spec.kind));
}

ModulationFn::LogValue add_scale(ModulationFn::LogValue v, double log_abs_scale, int scale_sign,
                                 std::size_t i) {
  if (v.sign == 0 || i == 0) return v;
  if (scale_sign == 0) return {0, 0.0};
  v.log_abs += static_cast<double>(i) * log_abs_scale;
  if (scale_sign < 0 && (i % 2 == 1)) v.sign = -v.sign;
  return v;
}

}  // namespace

ModulationFn::ModulationFn()
    : ModulationFn(from_function([](std::size_t) { return 0.0; }, "zero")) {}

ModulationFn ModulationFn::from_function(Evaluator eval, std::string description) {
  auto state = std::make_shared<State>();
  state->eval = std::move(eval);
  state->description = std::move(description);
  return ModulationFn(std::move(state));
}

ModulationFn ModulationFn::from_log_function(LogEvaluator eval, std::string description) {
  auto state = std::make_shared<State>();
  state->eval = [eval](std::size_t i) { return from_log(eval(i)); };
  state->log_eval = std::move(eval);
  state->description = std::move(description);
  return ModulationFn(std::move(state));
}

ModulationFn ModulationFn::tabulated(std::vector<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("tabulated modulation contains non-finite value");
  }
  return from_function(
      [table = std::move(values)](std::size_t i) { return i < table.size() ? table[i] : 0.0; },
      "tabulated");
}

ModulationFn ModulationFn::lazy(double value) {
  return from_function([value](std::size_t i) { return i == 0 ? value : 0.0; }, "lazy");
}

ModulationFn ModulationFn::scaled(double beta) const {
  if (!std::isfinite(beta)) throw InvalidArgument("modulation scale must be finite");
  const std::string desc = state_->description + " * " + std::to_string(beta) + "^i";
  if (state_->log_eval) {
    const double log_abs = beta == 0.0 ? 0.0 : std::log(std::abs(beta));
    const int sign = beta > 0.0 ? 1 : (beta < 0.0 ? -1 : 0);
    return from_log_function(
        [inner = state_->log_eval, log_abs, sign](std::size_t i) {
          return add_scale(inner(i), log_abs, sign, i);
        },
        desc);
  }
  return from_function(
      [self = *this, beta](std::size_t i) {
        return self(i) * std::pow(beta, static_cast<double>(i));
      },
      desc);
}

double ModulationFn::operator()(std::size_t i) const {
  std::lock_guard lock(state_->mutex);
  auto& cache = state_->cache;
  while (cache.size() <= i) cache.push_back(state_->eval(cache.size()));
  return cache[i];
}

std::vector<double> ModulationFn::prefix(std::size_t n) const {
  if (n == 0) return {};
  (void)(*this)(n - 1);
  std::lock_guard lock(state_->mutex);
  return {state_->cache.begin(), state_->cache.begin() + static_cast<std::ptrdiff_t>(n)};
}

const std::string& ModulationFn::description() const { return state_->description; }

namespace {

#ifdef __SIZEOF_FLOAT128__
using Wide = __float128;
#else
using Wide = long double;
#endif

// a_k from a_{k-1} by the exact ratio of consecutive terms.
Wide next_taylor_coeff(const KernelSpec& spec, Wide prev, std::size_t k) {
  const Wide x = static_cast<Wide>(k);
  const Wide s = spec.scale();
  switch (spec.kind) {
    case KernelKind::regularised_laplacian:
      return prev * (static_cast<Wide>(spec.d) + x - 1) / x * s;
    case KernelKind::p_step_random_walk:
      return prev * (static_cast<Wide>(spec.p) - x + 1) / x * s;
    case KernelKind::diffusion:
      return prev * s / x;
    case KernelKind::inverse_cosine: {
      // cos + sin expansion: signs + + - - + + ...
      const Wide mag = (prev < 0 ? -prev : prev) * s / x;
      return ((k / 2) % 2 == 0) ? mag : -mag;
    }
  }
  return 0;
}

void push_wide(std::vector<double>& hi, std::vector<double>& lo, Wide v) {
  const auto h = static_cast<double>(v);
  hi.push_back(h);
  lo.push_back(static_cast<double>(v - static_cast<Wide>(h)));
}

}  // namespace

CoeffSeq taylor_coeffs(const KernelSpec& spec, std::size_t k_max) {
  spec.validate();
  std::vector<double> hi{1.0};
  std::vector<double> lo{0.0};
  Wide a = 1;
  for (std::size_t k = 1; k <= k_max; ++k) {
    a = next_taylor_coeff(spec, a, k);
    push_wide(hi, lo, a);
  }
  return CoeffSeq(std::move(hi), std::move(lo));
}

CoeffSeq truncated_taylor_coeffs(const KernelSpec& spec, double tail_tol, std::size_t cap) {
  spec.validate();
  std::vector<double> hi{1.0};
  std::vector<double> lo{0.0};
  Wide a = 1;
  for (std::size_t k = 1; k <= cap; ++k) {
    a = next_taylor_coeff(spec, a, k);
    push_wide(hi, lo, a);
    // p-step coefficients vanish exactly past p; others decay monotonically
    // once below the tolerance.
    if (std::abs(hi.back()) < tail_tol) break;
  }
  return CoeffSeq(std::move(hi), std::move(lo));
}

ModulationFn closed_form_modulation(const KernelSpec& spec, bool absorb_scale) {
  spec.validate();
  if (!spec.has_closed_form_modulation()) {
    throw InvalidArgument(
        "the inverse cosine kernel has no closed-form modulation function; use "
        "symmetric_from_coeffs(truncated_taylor_coeffs(spec))");
  }
  auto base = ModulationFn::from_log_function(
      [spec](std::size_t i) { return closed_form_base(spec, i); },
      "closed_form:" + to_string(spec.kind));
  return absorb_scale ? base.scaled(spec.scale()) : base;
}

ModulationFn symmetric_from_coeffs(const CoeffSeq& coeffs) {
  if (!coeffs.is_normalized()) {
    throw InvalidArgument("symmetric_from_coeffs: coefficients must be normalised (a_0 = 1)");
  }
  const std::size_t n = coeffs.size();
  std::vector<Wide> w(n, 0);
  w[0] = 1;
  for (std::size_t i = 1; i < n; ++i) {
    Wide acc = static_cast<Wide>(coeffs[i]) + static_cast<Wide>(coeffs.low()[i]);
    for (std::size_t p = 1; p < i; ++p) acc -= w[p] * w[i - p];
    w[i] = acc / 2;
  }
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = static_cast<double>(w[i]);
  auto fn = ModulationFn::tabulated(std::move(f));
  return ModulationFn::from_function([fn](std::size_t i) { return fn(i); }, "iterative");
}

ModulationFn kernel_modulation(const KernelSpec& spec) {
  if (spec.has_closed_form_modulation()) return closed_form_modulation(spec);
  // The symmetric square root of the inverse cosine series decays only
  // polynomially, so tabulate far beyond where the coefficients vanish.
  return symmetric_from_coeffs(taylor_coeffs(spec, std::size_t{1024}));
}

std::vector<double> convolve(const ModulationFn& f1, const ModulationFn& f2, std::size_t k_max) {
  const auto a = f1.prefix(k_max + 1);
  const auto b = f2.prefix(k_max + 1);
  std::vector<double> out(k_max + 1, 0.0);
  for (std::size_t k = 0; k <= k_max; ++k) {
    double acc = 0.0;
    for (std::size_t p = 0; p <= k; ++p) acc += a[k - p] * b[p];
    out[k] = acc;
  }
  return out;
}

std::size_t min_batch_size(std::size_t m, double p_halt, double delta) {
  if (m < 1) throw InvalidArgument("min_batch_size: m must be >= 1");
  if (!(p_halt > 0.0 && p_halt < 1.0)) throw InvalidArgument("min_batch_size: p_halt outside (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("min_batch_size: delta outside (0, 1)");
  const double md = static_cast<double>(m);
  const double log_keep = std::log1p(-p_halt);
  const double log_target = std::log1p(-delta);
  // (1 - (1-p)^b)^m >= 1 - delta, evaluated in log space.
  auto covers = [&](std::size_t b) {
    const double tail = std::exp(static_cast<double>(b) * log_keep);
    return md * std::log1p(-tail) >= log_target;
  };
  const double exact = std::log(-std::expm1(log_target / md)) / log_keep;
  auto b = static_cast<std::size_t>(std::max(1.0, std::ceil(exact)));
  while (!covers(b)) ++b;
  while (b > 1 && covers(b - 1)) --b;
  return b;
}

double rademacher_bound(std::span<const double> coeff_bounds, double rho, std::size_t m,
                        double tail_tol) {
  if (m < 1) throw InvalidArgument("rademacher_bound: m must be >= 1");
  if (!(rho >= 0.0)) throw InvalidArgument("rademacher_bound: rho must be non-negative");
  if (coeff_bounds.empty()) throw InvalidArgument("rademacher_bound: empty coefficient bounds");
  double sum = 0.0;
  double power = 1.0;
  double last = 0.0;
  for (double a : coeff_bounds) {
    if (!(a >= 0.0)) throw InvalidArgument("rademacher_bound: coefficient bounds must be >= 0");
    last = a * power;
    sum += last;
    power *= rho;
  }
  if (!(last < tail_tol)) {
    throw NumericalError("rademacher_bound: series has not converged (last term " +
                         std::to_string(last) + ")");
  }
  return std::sqrt(sum / static_cast<double>(m));
}

void write_tabulated(std::ostream& out, std::span<const double> values) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (double v : values) out << v << '\n';
  out.precision(old_precision);
}

std::vector<double> read_tabulated(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    double v = 0.0;
    if (!(ss >> v)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ParseError("expected one number per line", lineno);
    }
    std::string rest;
    if (ss >> rest) throw ParseError("expected one number per line", lineno);
    if (!std::isfinite(v)) throw ParseError("non-finite value", lineno);
    values.push_back(v);
  }
  return values;
}

}  // namespace ggrf
