#ifndef QFOCK_FACTORIZATION_HPP
#define QFOCK_FACTORIZATION_HPP

// Scalar faces of the tensor factorization over disjoint regions:
//   <Psi(f),Psi(g)> = prod_parts <Psi(f_part),Psi(g_part)>
// and its order-n form
//   I_n(f,g) = sum_k C(n,k)^2 I_k(f1,g1) I_(n-k)(f2,g2).

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "qfock/error.hpp"
#include "qfock/fock_core.hpp"
#include "qfock/stepfn.hpp"

namespace qfock {

struct RegionSplit {
  std::vector<std::vector<std::string>> parts;
};

/// Throws unless the parts are pairwise disjoint and cover the partition.
inline void validate_split(const Partition& partition, const RegionSplit& split) {
  std::set<std::string> seen;
  for (const auto& part : split.parts)
    for (const auto& id : part) {
      if (!partition.index_of(id)) throw Error(ErrorKind::UnknownCellId, "no cell '" + id + "' in the partition");
      if (!seen.insert(id).second) throw Error(ErrorKind::InvalidArgument, "cell '" + id + "' appears in two parts");
    }
  if (seen.size() != partition.size())
    throw Error(ErrorKind::InvalidArgument, "split covers " + std::to_string(seen.size()) + " of " +
                                                std::to_string(partition.size()) + " cells");
}

/// f on the selected cells, zero elsewhere (same partition).
template <Scalar S>
StepFunction<S> restrict(const StepFunction<S>& f, std::span<const std::string> part) {
  std::vector<S> values(f.size(), scalar_traits<S>::from_real(real_t<S>(0)));
  for (const auto& id : part) {
    auto idx = f.partition().index_of(id);
    if (!idx) throw Error(ErrorKind::UnknownCellId, "no cell '" + id + "' in the partition");
    values[*idx] = f.value(*idx);
  }
  return StepFunction<S>(f.partition_ptr(), std::move(values));
}

struct ExponentialFactorizationReport {
  Complex closed_whole;
  Complex closed_product;
  Complex series_whole;
  Complex series_product;
  Complex log_whole;      // integral over the whole partition
  Complex log_parts_sum;  // sum of per-part integrals
  double closed_rel_error = 0.0;
  double series_rel_error = 0.0;
  double log_additivity_error = 0.0;
  bool passed = false;
};

/// f and g must share the partition the split refers to.
template <Scalar S>
ExponentialFactorizationReport check_exponential_factorization(const StepFunction<S>& f, const StepFunction<S>& g,
                                                               const RegionSplit& split, double c, double tol = 1e-10,
                                                               unsigned n_max = 400) {
  if (!f.shares_partition_with(g)) throw Error(ErrorKind::IncompatiblePartitions, "f and g must share a partition");
  validate_split(f.partition(), split);
  if (!exists_exponential(f).exists || !exists_exponential(g).exists)
    throw Error(ErrorKind::DomainViolation, "factorization needs both exponential vectors to exist");

  ExponentialFactorizationReport r;
  r.log_whole = log_integral(f, g);
  r.closed_whole = exp_inner_closed(f, g, c);
  // Each factor's series is truncated well below tol so that the product of
  // up to P+1 truncated sums still agrees to within tol.
  const double series_tol = tol / (4.0 * (static_cast<double>(split.parts.size()) + 1.0));
  r.series_whole = exp_inner_series(f, g, c, series_tol, n_max).value;
  r.closed_product = 1.0;
  r.series_product = 1.0;
  for (const auto& part : split.parts) {
    auto fp = restrict(f, std::span<const std::string>(part));
    auto gp = restrict(g, std::span<const std::string>(part));
    r.log_parts_sum += log_integral(fp, gp);
    r.closed_product *= exp_inner_closed(fp, gp, c);
    r.series_product *= exp_inner_series(fp, gp, c, series_tol, n_max).value;
  }
  auto rel = [](Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); };
  r.closed_rel_error = rel(r.closed_whole, r.closed_product);
  r.series_rel_error = rel(r.series_whole, r.series_product);
  r.log_additivity_error = std::abs(r.log_whole - r.log_parts_sum);
  r.passed = r.closed_rel_error <= tol && r.series_rel_error <= tol &&
             r.log_additivity_error <= 1e-12 * std::max(1.0, std::abs(r.log_whole));
  return r;
}

template <Scalar S>
struct OrderNFactorization {
  S lhs;
  S rhs;
  S discrepancy;  // lhs - rhs, exact for rationals
};

/// I_n(f,g) against sum_k C(n,k)^2 I_k(f1,g1) I_(n-k)(f2,g2) for a two-part split.
template <Scalar S>
OrderNFactorization<S> check_order_n_factorization(const StepFunction<S>& f, const StepFunction<S>& g,
                                                   const RegionSplit& split, unsigned n, const real_t<S>& c) {
  if (split.parts.size() != 2) throw Error(ErrorKind::InvalidArgument, "order-n factorization takes a two-part split");
  if (!f.shares_partition_with(g)) throw Error(ErrorKind::IncompatiblePartitions, "f and g must share a partition");
  validate_split(f.partition(), split);
  auto f1 = restrict(f, std::span<const std::string>(split.parts[0]));
  auto g1 = restrict(g, std::span<const std::string>(split.parts[0]));
  auto f2 = restrict(f, std::span<const std::string>(split.parts[1]));
  auto g2 = restrict(g, std::span<const std::string>(split.parts[1]));
  const auto whole = inner_table(f, g, n, c).values;
  const auto t1 = inner_table(f1, g1, n, c).values;
  const auto t2 = inner_table(f2, g2, n, c).values;
  S rhs = scalar_traits<S>::from_real(real_t<S>(0));
  for (unsigned k = 0; k <= n; ++k) {
    const BigInt b = binomial(n, k);
    rhs += scalar_traits<S>::from_int(b * b) * t1[k] * t2[n - k];
  }
  return {whole[n], rhs, whole[n] - rhs};
}

}  // namespace qfock

#endif  // QFOCK_FACTORIZATION_HPP
