#pragma once

#include <complex>
#include <cstddef>

#include "ggrf/graph.hpp"
#include "ggrf/kernel_spec.hpp"
#include "ggrf/modulation.hpp"

namespace ggrf {

struct TaylorKernelResult {
  DenseMatrix value;
  std::size_t terms_used = 0;  // index of the last term added, plus one
};

/// sum_k a_k W^k by repeated multiply-accumulate. Stops once a non-zero term has
/// Frobenius norm below `tail_tol` (or W^k vanishes). If the coefficients run out
/// while the last terms are still above `tail_tol` and not decreasing, the series
/// is taken to diverge and NumericalError is thrown; sequences of at most two
/// non-zero terms are treated as polynomials and never fail.
TaylorKernelResult taylor_kernel(const DenseMatrix& w, const CoeffSeq& coeffs,
                                 double tail_tol = 1e-12);

/// Closed form of one of the standard kernels of L = I - W~ (W~ the normalised
/// adjacency of g), including its prefactor:
///   regularised_laplacian  d LU solves of (I + sigma^2 L)
///   p_step_random_walk     repeated products of (alpha I - L)
///   diffusion              scaling and squaring of exp(-sigma^2 L / 2)
///   inverse_cosine         taylor_kernel on the cos + sin series
DenseMatrix exact_kernel(const Graph& g, const KernelSpec& spec);

/// The normalised series sum_k a_k (scale W)^k of `spec` for an arbitrary
/// operator W, evaluated in closed form (no prefactor).
DenseMatrix operator_kernel(const DenseMatrix& w, const KernelSpec& spec);

/// Matrix exponential: scaling and squaring with a degree-20 Taylor core,
/// ceil(log2 ||A||_1) squarings.
DenseMatrix expm(const DenseMatrix& a);
Eigen::MatrixXcd expm_complex(const Eigen::MatrixXcd& a);

/// Smallest eigenvalue of the symmetric part of m.
double min_eigenvalue(const DenseMatrix& m);

}  // namespace ggrf
