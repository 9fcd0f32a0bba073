#include "ggrf/exact_oracle.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "ggrf/errors.hpp"

namespace ggrf {

namespace {

template <class Matrix>
Matrix expm_impl(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("expm: matrix must be square");
  const auto n = a.rows();
  if (n == 0) return a;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm1)) throw NumericalError("expm: non-finite input");
  int squarings = 0;
  if (norm1 > 1.0) squarings = static_cast<int>(std::ceil(std::log2(norm1)));
  const Matrix scaled = a / std::ldexp(1.0, squarings);
  // Horner form of sum_{k<=20} X^k / k!.
  constexpr int kDegree = 20;
  Matrix result = Matrix::Identity(n, n);
  for (int k = kDegree; k >= 1; --k) {
    result = (Matrix::Identity(n, n) + (scaled * result) / static_cast<double>(k)).eval();
  }
  for (int s = 0; s < squarings; ++s) result = (result * result).eval();
  return result;
}

DenseMatrix power_series_closed(const DenseMatrix& w, const KernelSpec& spec) {
  const auto n = w.rows();
  const DenseMatrix id = DenseMatrix::Identity(n, n);
  const DenseMatrix sw = spec.scale() * w;
  switch (spec.kind) {
    case KernelKind::regularised_laplacian: {
      // sum_k binom(d+k-1, k) X^k = (I - X)^-d
      Eigen::PartialPivLU<DenseMatrix> lu(id - sw);
      if (!(std::abs(lu.determinant()) > 0.0)) throw NumericalError("singular solve in exact oracle");
      DenseMatrix x = id;
      for (int i = 0; i < spec.d; ++i) x = lu.solve(x);
      return x;
    }
    case KernelKind::p_step_random_walk: {
      const DenseMatrix base = id + sw;
      DenseMatrix x = id;
      for (int i = 0; i < spec.p; ++i) x = (x * base).eval();
      return x;
    }
    case KernelKind::diffusion:
      return expm(sw);
    case KernelKind::inverse_cosine: {
      // cos(X) + sin(X) = Re(exp(iX)) + Im(exp(iX))
      const Eigen::MatrixXcd e = expm_complex(Eigen::MatrixXcd(std::complex<double>(0.0, 1.0) * sw.cast<std::complex<double>>()));
      return e.real() + e.imag();
    }
  }
  throw InvalidArgument("unknown kernel kind");
}

}  // namespace

DenseMatrix expm(const DenseMatrix& a) { return expm_impl(a); }
Eigen::MatrixXcd expm_complex(const Eigen::MatrixXcd& a) { return expm_impl(a); }

TaylorKernelResult taylor_kernel(const DenseMatrix& w, const CoeffSeq& coeffs, double tail_tol) {
  if (w.rows() != w.cols()) throw InvalidArgument("taylor_kernel: matrix must be square");
  if (coeffs.empty()) throw InvalidArgument("taylor_kernel: empty coefficient sequence");
  if (!(tail_tol > 0.0)) throw InvalidArgument("taylor_kernel: tail_tol must be positive");
  const auto n = w.rows();
  TaylorKernelResult out{coeffs[0] * DenseMatrix::Identity(n, n), 1};
  DenseMatrix power = DenseMatrix::Identity(n, n);
  double prev_term = std::abs(coeffs[0]) * power.norm();
  double last_term = prev_term;
  std::size_t nonzero_terms = coeffs[0] != 0.0 ? 1 : 0;
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    power = (power * w).eval();
    const double power_norm = power.norm();
    if (power_norm == 0.0) {
      out.terms_used = k;
      return out;
    }
    if (coeffs[k] == 0.0) continue;
    out.value += coeffs[k] * power;
    out.terms_used = k + 1;
    prev_term = last_term;
    last_term = std::abs(coeffs[k]) * power_norm;
    ++nonzero_terms;
    if (!std::isfinite(last_term)) throw NumericalError("taylor_kernel: series overflowed");
    if (last_term < tail_tol) return out;
  }
  if (nonzero_terms > 2 && last_term >= tail_tol && last_term >= prev_term) {
    throw NumericalError("taylor_kernel: series does not converge within " +
                         std::to_string(coeffs.size()) + " terms (last term norm " +
                         std::to_string(last_term) + ")");
  }
  return out;
}

DenseMatrix operator_kernel(const DenseMatrix& w, const KernelSpec& spec) {
  spec.validate();
  if (w.rows() != w.cols()) throw InvalidArgument("operator_kernel: matrix must be square");
  return power_series_closed(w, spec);
}

DenseMatrix exact_kernel(const Graph& g, const KernelSpec& spec) {
  spec.validate();
  const std::size_t n = g.num_nodes();
  if (n > 4096) throw InvalidArgument("exact_kernel: N exceeds the dense limit of 4096");
  const DenseMatrix lap = laplacian_as_operator(g).to_dense();
  const auto nn = static_cast<Eigen::Index>(n);
  const DenseMatrix id = DenseMatrix::Identity(nn, nn);
  switch (spec.kind) {
    case KernelKind::regularised_laplacian: {
      Eigen::PartialPivLU<DenseMatrix> lu(id + spec.sigma * spec.sigma * lap);
      if (!(std::abs(lu.determinant()) > 0.0)) throw NumericalError("singular solve in exact oracle");
      DenseMatrix x = id;
      for (int i = 0; i < spec.d; ++i) x = lu.solve(x);
      return x;
    }
    case KernelKind::p_step_random_walk: {
      const DenseMatrix base = spec.alpha * id - lap;
      DenseMatrix x = id;
      for (int i = 0; i < spec.p; ++i) x = (x * base).eval();
      return x;
    }
    case KernelKind::diffusion:
      return expm((-0.5 * spec.sigma * spec.sigma) * lap);
    case KernelKind::inverse_cosine: {
      const DenseMatrix w = id - lap;
      const auto series = taylor_kernel(w, taylor_coeffs(spec, std::size_t{400}));
      return spec.prefactor() * series.value;
    }
  }
  throw InvalidArgument("unknown kernel kind");
}

double min_eigenvalue(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("min_eigenvalue: matrix must be square");
  const DenseMatrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
  return solver.eigenvalues().minCoeff();
}

}  // namespace ggrf
