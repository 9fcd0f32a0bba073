#pragma once

#include <string>
#include <string_view>

namespace ggrf {

enum class KernelKind { regularised_laplacian, p_step_random_walk, diffusion, inverse_cosine };

/// One of the standard graph node kernels, all functions of L = I - W~:
///
///   regularised_laplacian  (I + sigma^2 L)^-d
///   p_step_random_walk     (alpha I - L)^p,  alpha >= 2
///   diffusion              exp(-sigma^2 L / 2)
///   inverse_cosine         cos(L pi / 4)
///
/// Each equals prefactor() * sum_k a_k (scale() W~)^k with a_0 = 1.
struct KernelSpec {
  KernelKind kind = KernelKind::diffusion;
  int d = 2;             // regularised_laplacian exponent
  int p = 2;             // p_step_random_walk exponent
  double alpha = 2.0;    // p_step_random_walk shift
  double sigma = 1.0;    // regulariser for regularised_laplacian and diffusion

  static KernelSpec regularised_laplacian(int d, double sigma) {
    return {KernelKind::regularised_laplacian, d, 2, 2.0, sigma};
  }
  static KernelSpec p_step(int p, double alpha) {
    return {KernelKind::p_step_random_walk, 2, p, alpha, 1.0};
  }
  static KernelSpec diffusion(double sigma) { return {KernelKind::diffusion, 2, 2, 2.0, sigma}; }
  static KernelSpec inverse_cosine() { return {KernelKind::inverse_cosine, 2, 2, 2.0, 1.0}; }

  /// Throws InvalidArgument when parameters are out of range.
  void validate() const;

  /// Per-power factor absorbed into the Taylor coefficients: (1 + sigma^-2)^-1,
  /// 1/(alpha - 1), sigma^2/2 and pi/4 respectively.
  double scale() const;

  /// Ratio between the closed form and its normalised series (a_0 = 1).
  double prefactor() const;

  bool has_closed_form_modulation() const { return kind != KernelKind::inverse_cosine; }
};

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);

}  // namespace ggrf
