#ifndef QFOCK_GRAM_HPP
#define QFOCK_GRAM_HPP

// Gram matrices of quadratic exponential vectors and the positivity
// machinery behind their linear independence.
//
// For a family f_1..f_N with ||f_i||_inf < 1/2 the kernel
//   a_ij = -(c/2) integral ln(1 - 4 conj(f_i) f_j)
// is positive semidefinite (it expands as sum_n (c/2)(4^n/n) <f_i^n, f_j^n>),
// and b_ij = exp(a_ij) = <Psi(f_i), Psi(f_j)> inherits this through Schur
// powers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "qfock/error.hpp"
#include "qfock/fock_core.hpp"
#include "qfock/parallel.hpp"
#include "qfock/stepfn.hpp"

namespace qfock {

using CMatrix = Eigen::MatrixXcd;

struct Spectrum {
  double min_eigenvalue = 0.0;
  double spectral_norm = 0.0;  // max |eigenvalue|
  Eigen::VectorXd eigenvalues;
};

inline double hermitian_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_hermitian(const CMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::NotHermitian, "matrix is not square");
  if (m.size() == 0) return;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (hermitian_defect(m) > 1e-12 * scale) throw Error(ErrorKind::NotHermitian, "matrix differs from its adjoint");
}

inline Spectrum hermitian_spectrum(const CMatrix& m) {
  require_hermitian(m);
  Spectrum s;
  if (m.size() == 0) return s;
  const CMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
  s.eigenvalues = solver.eigenvalues();
  s.min_eigenvalue = s.eigenvalues.minCoeff();
  s.spectral_norm = s.eigenvalues.cwiseAbs().maxCoeff();
  return s;
}

/// min eigenvalue >= -tol * ||M||_2.
inline bool is_psd(const CMatrix& m, double tol = 1e-12) {
  const auto s = hermitian_spectrum(m);
  return s.min_eigenvalue >= -tol * s.spectral_norm;
}

inline CMatrix hadamard_power(const CMatrix& m, unsigned n) {
  CMatrix r = CMatrix::Ones(m.rows(), m.cols());
  for (unsigned k = 0; k < n; ++k) r = r.cwiseProduct(m);
  return r;
}

inline CMatrix hadamard_exp(const CMatrix& m) {
  return m.unaryExpr([](const Complex& z) { return std::exp(z); });
}

/// Every Hadamard power up to n_max and the entrywise exponential are PSD.
inline bool verify_schur_powers(const CMatrix& m, unsigned n_max, double tol = 1e-12) {
  require_hermitian(m);
  for (unsigned n = 1; n <= n_max; ++n)
    if (!is_psd(hadamard_power(m, n), tol)) return false;
  return is_psd(hadamard_exp(m), tol);
}

struct GramReport {
  CMatrix matrix;         // b_ij = <Psi(f_i), Psi(f_j)>
  CMatrix kernel_matrix;  // a_ij = -(c/2) integral ln(1 - 4 conj(f_i) f_j)
  double min_eigenvalue = 0.0;
  double spectral_norm = 0.0;
  double tol = 1e-10;
  bool psd = false;
  bool independent = false;
  std::vector<std::vector<bool>> pairwise_distinct;
};

namespace detail {

template <Scalar S>
std::vector<FloatFunction> admissible_family(std::span<const StepFunction<S>> fs) {
  std::vector<FloatFunction> floats;
  floats.reserve(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (!exists_exponential(fs[i]).exists)
      throw Error(ErrorKind::DomainViolation, "function #" + std::to_string(i) + " has ||f||_inf >= 1/2");
    floats.push_back(to_float(fs[i]));
  }
  return common_refinement(std::span<const FloatFunction>(floats));
}

/// Cells where f_i != f_j carry positive total measure.
template <Scalar S>
std::vector<std::vector<bool>> distinct_pairs(std::span<const StepFunction<S>> fs) {
  auto shared = common_refinement(fs);
  const std::size_t n = shared.size();
  std::vector<std::vector<bool>> out(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      Rational differing = 0;
      const auto& a = shared[i];
      const auto& b = shared[j];
      for (std::size_t k = 0; k < a.size(); ++k)
        if (!(a.value(k) == b.value(k))) differing += a.measure(k);
      out[i][j] = differing > 0;
    }
  return out;
}

}  // namespace detail

template <Scalar S>
GramReport gram_matrix(std::span<const StepFunction<S>> fs, double c, double tol = 1e-10, unsigned jobs = 1) {
  if (!(c > 0)) throw Error(ErrorKind::InvalidArgument, "the constant c must be positive");
  auto family = detail::admissible_family(fs);
  const auto n = static_cast<Eigen::Index>(family.size());
  GramReport r;
  r.tol = tol;
  r.matrix = CMatrix::Zero(n, n);
  r.kernel_matrix = CMatrix::Zero(n, n);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> upper;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) upper.emplace_back(i, j);
  parallel_for(upper.size(), jobs, [&](std::size_t k) {
    const auto [i, j] = upper[k];
    const Complex a = -0.5 * c * log_integral(family[i], family[j]);
    if (i == j) {
      r.kernel_matrix(i, i) = a.real();
      r.matrix(i, i) = std::exp(a.real());
    } else {
      r.kernel_matrix(i, j) = a;
      r.kernel_matrix(j, i) = std::conj(a);
      r.matrix(i, j) = std::exp(a);
      r.matrix(j, i) = std::conj(r.matrix(i, j));
    }
  });
  const auto spectrum = hermitian_spectrum(r.matrix);
  r.min_eigenvalue = spectrum.min_eigenvalue;
  r.spectral_norm = spectrum.spectral_norm;
  r.psd = r.min_eigenvalue >= -tol * r.spectral_norm;
  r.independent = r.min_eigenvalue > tol * r.spectral_norm;
  r.pairwise_distinct = detail::distinct_pairs(fs);
  return r;
}

struct IndependenceVerdict {
  bool independent = false;
  double min_eigenvalue = 0.0;
  double spectral_norm = 0.0;
  double relative_margin = 0.0;  // min_eigenvalue / spectral_norm
  bool hypothesis_holds = false; // every pair differs on positive measure
  std::vector<std::vector<bool>> pairwise_distinct;
};

template <Scalar S>
IndependenceVerdict linear_independence(std::span<const StepFunction<S>> fs, double c, double tol = 1e-10,
                                        unsigned jobs = 1) {
  auto report = gram_matrix(fs, c, tol, jobs);
  IndependenceVerdict v;
  v.independent = report.independent;
  v.min_eigenvalue = report.min_eigenvalue;
  v.spectral_norm = report.spectral_norm;
  v.relative_margin = report.spectral_norm > 0 ? report.min_eigenvalue / report.spectral_norm : 0.0;
  v.pairwise_distinct = report.pairwise_distinct;
  v.hypothesis_holds = true;
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = 0; j < fs.size(); ++j)
      if (i != j && !v.pairwise_distinct[i][j]) v.hypothesis_holds = false;
  return v;
}

}  // namespace qfock

#endif  // QFOCK_GRAM_HPP
