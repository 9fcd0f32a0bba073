#include "ggrf/kernel_spec.hpp"

#include <cmath>
#include <numbers>

#include "ggrf/errors.hpp"

namespace ggrf {

void KernelSpec::validate() const {
  switch (kind) {
    case KernelKind::regularised_laplacian:
      if (d < 1) throw InvalidArgument("regularised_laplacian: d must be a positive integer");
      if (!(sigma > 0.0)) throw InvalidArgument("regularised_laplacian: sigma must be positive");
      break;
    case KernelKind::p_step_random_walk:
      if (p < 1) throw InvalidArgument("p_step_random_walk: p must be a positive integer");
      if (!(alpha >= 2.0)) throw InvalidArgument("p_step_random_walk: alpha must be >= 2");
      break;
    case KernelKind::diffusion:
      if (!(sigma > 0.0)) throw InvalidArgument("diffusion: sigma must be positive");
      break;
    case KernelKind::inverse_cosine:
      break;
  }
}

double KernelSpec::scale() const {
  switch (kind) {
    case KernelKind::regularised_laplacian:
      return 1.0 / (1.0 + 1.0 / (sigma * sigma));
    case KernelKind::p_step_random_walk:
      return 1.0 / (alpha - 1.0);
    case KernelKind::diffusion:
      return sigma * sigma / 2.0;
    case KernelKind::inverse_cosine:
      return std::numbers::pi / 4.0;
  }
  return 1.0;
}

double KernelSpec::prefactor() const {
  switch (kind) {
    case KernelKind::regularised_laplacian:
      return std::pow(1.0 + sigma * sigma, -static_cast<double>(d));
    case KernelKind::p_step_random_walk:
      return std::pow(alpha - 1.0, static_cast<double>(p));
    case KernelKind::diffusion:
      return std::exp(-sigma * sigma / 2.0);
    case KernelKind::inverse_cosine:
      // cos(pi/4 (I - W)) = cos(pi/4) [cos(pi/4 W) + sin(pi/4 W)]
      return std::numbers::sqrt2 / 2.0;
  }
  return 1.0;
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::regularised_laplacian:
      return "regularised_laplacian";
    case KernelKind::p_step_random_walk:
      return "p_step_random_walk";
    case KernelKind::diffusion:
      return "diffusion";
    case KernelKind::inverse_cosine:
      return "inverse_cosine";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "regularised_laplacian" || name == "d_regularised_laplacian" ||
      name == "laplacian") {
    return KernelKind::regularised_laplacian;
  }
  if (name == "p_step_random_walk" || name == "p_step") return KernelKind::p_step_random_walk;
  if (name == "diffusion") return KernelKind::diffusion;
  if (name == "inverse_cosine") return KernelKind::inverse_cosine;
  throw InvalidArgument("unknown kernel '" + std::string(name) +
                        "' (expected regularised_laplacian, p_step_random_walk, diffusion or "
                        "inverse_cosine)");
}

}  // namespace ggrf
