#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ggrf/kernel_spec.hpp"

namespace ggrf {

/// Taylor coefficients (a_0, ..., a_kmax) of K = sum_k a_k W^k.
class CoeffSeq {
 public:
  CoeffSeq() = default;
  explicit CoeffSeq(std::vector<double> values) : values_(std::move(values)), low_(values_.size(), 0.0) {}
  /// Double-double form: a_k = values[k] + low[k] exactly, |low[k]| <= ulp(values[k]) / 2.
  CoeffSeq(std::vector<double> values, std::vector<double> low);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const noexcept { return values_; }
  /// Rounding residuals of values(); zero for sequences built from plain doubles.
  std::span<const double> low() const noexcept { return low_; }

  /// a_0 == 1 within `tol`.
  bool is_normalized(double tol = 1e-12) const;

 private:
  std::vector<double> values_;
  std::vector<double> low_;
};

/// A modulation function f: {0, 1, 2, ...} -> R.
///
/// Values are computed lazily and memoised in a cache shared by copies.
/// Evaluation is thread-safe; hot loops should take a `prefix()` table once
/// and fall back to `operator()` only past its end.
class ModulationFn {
 public:
  using Evaluator = std::function<double(std::size_t)>;

  /// Sign and natural log of |value|, for closed forms that overflow in
  /// linear space. `sign == 0` encodes an exact zero.
  struct LogValue {
    int sign = 0;
    double log_abs = 0.0;
  };
  using LogEvaluator = std::function<LogValue(std::size_t)>;

  ModulationFn();  // f = 0

  static ModulationFn from_function(Evaluator eval, std::string description);
  static ModulationFn from_log_function(LogEvaluator eval, std::string description);

  /// f(i) = values[i], and 0 past the end of the table.
  static ModulationFn tabulated(std::vector<double> values);

  /// Lazy walker: f(i) = value * [i == 0].
  static ModulationFn lazy(double value = 1.0);

  /// f(i) * beta^i. Closed forms are rescaled in log space.
  ModulationFn scaled(double beta) const;

  double operator()(std::size_t i) const;
  std::vector<double> prefix(std::size_t n) const;

  const std::string& description() const;

 private:
  struct State;
  explicit ModulationFn(std::shared_ptr<State> state) : state_(std::move(state)) {}
  std::shared_ptr<State> state_;
};

/// Normalised Taylor coefficients of `spec` up to `k_max`, with the per-power
/// regulariser retained (a_k includes spec.scale()^k). Computed in extended
/// precision and kept in double-double form.
CoeffSeq taylor_coeffs(const KernelSpec& spec, std::size_t k_max);

/// Same, truncated at the first k >= 1 with |a_k| < tail_tol (at most `cap` + 1 terms).
CoeffSeq truncated_taylor_coeffs(const KernelSpec& spec, double tail_tol = 1e-12,
                                 std::size_t cap = 400);

/// Symmetric closed-form modulation function whose self-convolution gives
/// taylor_coeffs(spec). With `absorb_scale == false` the spec.scale()^i factor
/// is left out and the caller is expected to walk spec.scale() * W instead.
/// Throws InvalidArgument for the inverse cosine kernel, which has no closed
/// form; use symmetric_from_coeffs for it.
ModulationFn closed_form_modulation(const KernelSpec& spec, bool absorb_scale = true);

/// The positive-sign symmetric solution of f * f = coeffs, tabulated to
/// coeffs.size() entries. Throws InvalidArgument unless coeffs[0] == 1.
/// The recurrence cancels heavily (about 3^i for the diffusion series), so it
/// runs in extended precision on the double-double coefficients.
ModulationFn symmetric_from_coeffs(const CoeffSeq& coeffs);

/// Symmetric modulation for any kernel: closed form when one exists, the
/// iterative solver otherwise.
ModulationFn kernel_modulation(const KernelSpec& spec);

/// (sum_{p=0}^k f1(k-p) f2(p)) for k = 0..k_max.
std::vector<double> convolve(const ModulationFn& f1, const ModulationFn& f2, std::size_t k_max);

/// Smallest b with (1 - (1 - p_halt)^b)^m >= 1 - delta: the number of
/// tabulated modulation values that covers all m walks with probability >= 1 - delta.
std::size_t min_batch_size(std::size_t m, double p_halt, double delta);

/// sqrt((1/m) sum_i bounds_i rho^i). Throws NumericalError if the last supplied
/// term is not below `tail_tol`.
double rademacher_bound(std::span<const double> coeff_bounds, double rho, std::size_t m,
                        double tail_tol = 1e-12);

/// One value per line, round-trip precision.
void write_tabulated(std::ostream& out, std::span<const double> values);
std::vector<double> read_tabulated(std::istream& in);

}  // namespace ggrf
