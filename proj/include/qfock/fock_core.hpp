#ifndef QFOCK_FOCK_CORE_HPP
#define QFOCK_FOCK_CORE_HPP

// n-particle inner products I_n = <B+^n_f Phi, B+^n_g Phi> and everything
// built on them: the existence criterion for quadratic exponential vectors,
// the truncated exponential series, its closed form, and the t-derivative
// identity.
//
// I_n obeys
//   I_n = c * sum_{k<n} 2^(2k+1) n!(n-1)!/((n-k-1)!)^2 <f^(k+1),g^(k+1)> I_(n-k-1)
// with I_0 = 1. Dividing through by (n!)^2 gives the normalized form used by
// the series engine,
//   J_n = c/(2n) * sum_{k<n} <(2f)^(k+1),(2g)^(k+1)> J_(n-k-1),   J_n = I_n/(n!)^2,
// whose terms stay bounded when ||f||_inf < 1/2.

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include "qfock/error.hpp"
#include "qfock/rational.hpp"
#include "qfock/stepfn.hpp"

namespace qfock {

namespace detail {

template <Scalar S>
void require_positive_c(const real_t<S>& c) {
  if (!(c > real_t<S>(0))) throw Error(ErrorKind::InvalidArgument, "the constant c must be positive");
}

template <Scalar S>
std::pair<StepFunction<S>, StepFunction<S>> shared(const StepFunction<S>& f, const StepFunction<S>& g) {
  if (f.shares_partition_with(g)) return {f, g};
  return common_refinement(f, g);
}

/// 2^(2k+1) n!(n-1)!/((n-k-1)!)^2, exact.
inline BigInt recursion_weight(unsigned n, unsigned k) {
  BigInt num = 1;
  for (unsigned i = n - k; i <= n; ++i) num *= i;          // n!/(n-k-1)!
  BigInt num2 = 1;
  for (unsigned i = n - k; i <= n - 1; ++i) num2 *= i;     // (n-1)!/(n-k-1)!
  return (BigInt(1) << (2 * k + 1)) * num * num2;
}

}  // namespace detail

template <Scalar S>
struct InnerProductTable {
  StepFunction<S> f;
  StepFunction<S> g;
  real_t<S> c;
  std::vector<S> values;  // I_0..I_N

  std::size_t order() const { return values.empty() ? 0 : values.size() - 1; }
};

/// I_0..I_N by dynamic programming over the recursion; exact for rationals.
template <Scalar S>
InnerProductTable<S> inner_table(const StepFunction<S>& f, const StepFunction<S>& g, unsigned n_max,
                                 const real_t<S>& c) {
  detail::require_positive_c<S>(c);
  auto [fs, gs] = detail::shared(f, g);
  std::vector<S> m(n_max + 1);
  for (unsigned k = 1; k <= n_max; ++k) m[k] = moment(fs, gs, static_cast<int>(k));

  const S cs = scalar_traits<S>::from_real(c);
  std::vector<S> table;
  table.reserve(n_max + 1);
  table.push_back(scalar_traits<S>::from_real(real_t<S>(1)));
  for (unsigned n = 1; n <= n_max; ++n) {
    S acc = scalar_traits<S>::from_real(real_t<S>(0));
    for (unsigned k = 0; k < n; ++k) {
      if (scalar_traits<S>::is_zero(m[k + 1])) continue;
      acc += scalar_traits<S>::from_int(detail::recursion_weight(n, k)) * m[k + 1] * table[n - k - 1];
    }
    table.push_back(cs * acc);
  }
  return {std::move(fs), std::move(gs), c, std::move(table)};
}

template <Scalar S>
S nth_inner(const StepFunction<S>& f, const StepFunction<S>& g, unsigned n, const real_t<S>& c) {
  return inner_table(f, g, n, c).values[n];
}

/// J_0..J_N with J_n = I_n/(n!)^2, via the normalized recursion.
template <Scalar S>
std::vector<S> normalized_table(const StepFunction<S>& f, const StepFunction<S>& g, unsigned n_max,
                                const real_t<S>& c) {
  detail::require_positive_c<S>(c);
  auto [fs, gs] = detail::shared(f, g);
  const S two = scalar_traits<S>::from_real(real_t<S>(2));
  auto f2 = scale(two, fs);
  auto g2 = scale(two, gs);
  std::vector<S> M(n_max + 1);
  for (unsigned k = 1; k <= n_max; ++k) M[k] = moment(f2, g2, static_cast<int>(k));
  std::vector<S> J{scalar_traits<S>::from_real(real_t<S>(1))};
  for (unsigned n = 1; n <= n_max; ++n) {
    S acc = scalar_traits<S>::from_real(real_t<S>(0));
    for (unsigned k = 0; k < n; ++k) acc += M[k + 1] * J[n - k - 1];
    J.push_back(scalar_traits<S>::from_real(c / real_t<S>(2 * n)) * acc);
  }
  return J;
}

/// <B+^(n-1)_f Phi, B_h B+^n_g Phi>, n >= 1.
template <Scalar S>
S annihilator_matrix_element(const StepFunction<S>& f, const StepFunction<S>& h, const StepFunction<S>& g,
                             unsigned n, const real_t<S>& c) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "annihilator_matrix_element needs n >= 1");
  detail::require_positive_c<S>(c);
  const StepFunction<S> trio[3] = {f, h, g};
  auto r = common_refinement(std::span<const StepFunction<S>>(trio, 3));
  const auto& fs = r[0];
  const auto& hs = r[1];
  const auto& gs = r[2];
  auto table = inner_table(fs, gs, n - 1, c).values;
  S acc = scalar_traits<S>::from_real(real_t<S>(0));
  for (unsigned k = 0; k < n; ++k) {
    S mm = mixed_moment(hs, fs, gs, k);
    if (scalar_traits<S>::is_zero(mm)) continue;
    acc += scalar_traits<S>::from_int(detail::recursion_weight(n, k)) * mm * table[n - k - 1];
  }
  return scalar_traits<S>::from_real(c) * acc;
}

// ---------------------------------------------------------------------------
// Existence

struct ExistenceVerdict {
  bool exists = false;
  double sup_norm = 0.0;
  double margin = 0.0;                 // 1/2 - ||f||_inf
  std::optional<Rational> exact_margin;  // when ||f||_inf is rational
};

/// Psi(f) exists iff ||f||_inf < 1/2; decided exactly for rational values.
template <Scalar S>
ExistenceVerdict exists_exponential(const StepFunction<S>& f) {
  const auto s2 = sup_norm_sq(f);
  ExistenceVerdict v;
  v.exists = real_t<S>(4) * s2 < real_t<S>(1);
  v.sup_norm = std::sqrt(scalar_traits<S>::real_to_double(s2));
  if constexpr (is_exact_v<S>) {
    if (auto root = exact_sqrt(s2)) {
      v.exact_margin = Rational(1, 2) - *root;
      v.margin = to_double(*v.exact_margin);
    } else {
      v.margin = 0.5 - v.sup_norm;
    }
  } else {
    v.margin = 0.5 - v.sup_norm;
  }
  return v;
}

/// 4n(n-1)||f||_inf^2 + 2nc||f||_2^2, the per-step growth factor of ||B+^n_f Phi||^2.
template <Scalar S>
double norm_growth_bound(const StepFunction<S>& f, unsigned n, double c) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "norm_growth_bound needs n >= 1");
  const double s2 = scalar_traits<S>::real_to_double(sup_norm_sq(f));
  const double l2 = scalar_traits<S>::real_to_double(l2_norm_sq(f));
  return 4.0 * n * (n - 1.0) * s2 + 2.0 * n * c * l2;
}

// ---------------------------------------------------------------------------
// Exponential series

struct SeriesDiagnostics {
  unsigned truncation_order = 0;
  Complex partial_sum{};
  double tail_bound = std::numeric_limits<double>::infinity();
  double ratio_estimate = std::numeric_limits<double>::infinity();
  bool converged = false;
};

struct SeriesResult {
  Complex value{};
  SeriesDiagnostics diagnostics;
};

/// Incremental evaluation of sum_n J_n(f,g) together with the Cauchy-Schwarz
/// tail bound. Each advance() adds one order; the work per order is linear
/// in the current order.
class SeriesEngine {
 public:
  struct Row {
    unsigned n;
    Complex term;
    Complex partial_sum;
    double tail_bound;
    double ratio;
  };

  template <Scalar S>
  SeriesEngine(const StepFunction<S>& f, const StepFunction<S>& g, double c) : c_(c) {
    if (!(c > 0)) throw Error(ErrorKind::InvalidArgument, "the constant c must be positive");
    auto [fs, gs] = detail::shared(to_float(f), to_float(g));
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const double m = to_double(fs.measure(i));
      cells_.push_back({m, 4.0 * std::conj(fs.value(i)) * gs.value(i), 4.0 * std::norm(fs.value(i)),
                        4.0 * std::norm(gs.value(i))});
    }
    sup_f_ = scalar_traits<Complex>::real_to_double(sup_norm_sq(fs));
    sup_g_ = scalar_traits<Complex>::real_to_double(sup_norm_sq(gs));
    l2_f_ = l2_norm_sq(fs);
    l2_g_ = l2_norm_sq(gs);
    fg_.J.push_back(1.0);
    ff_.J.push_back(1.0);
    gg_.J.push_back(1.0);
    partial_ = 1.0;
  }

  unsigned order() const { return static_cast<unsigned>(fg_.J.size() - 1); }
  Complex partial_sum() const { return partial_; }
  Complex last_term() const { return fg_.J.back(); }

  /// sup over m > order() of sqrt(r_f(m) r_g(m)), r(m) = growth(m)/m^2.
  double ratio() const {
    const unsigned next = order() + 1;
    return std::sqrt(sup_rate(sup_f_, l2_f_, next) * sup_rate(sup_g_, l2_g_, next));
  }

  double tail_bound() const {
    const double r = ratio();
    if (!(r < 1.0)) return std::numeric_limits<double>::infinity();
    const double a = std::sqrt(std::max(0.0, ff_.J.back().real()) * std::max(0.0, gg_.J.back().real()));
    return a * r / (1.0 - r);
  }

  Row row() const { return {order(), last_term(), partial_, tail_bound(), ratio()}; }

  void advance() {
    const unsigned n = order() + 1;
    fg_.extend(n, c_, cells_, [](const CellData& d) { return d.fg; });
    ff_.extend(n, c_, cells_, [](const CellData& d) { return Complex(d.ff, 0.0); });
    gg_.extend(n, c_, cells_, [](const CellData& d) { return Complex(d.gg, 0.0); });
    partial_ += fg_.J.back();
  }

 private:
  struct CellData {
    double measure;
    Complex fg;  // 4 conj(f) g
    double ff;   // 4 |f|^2
    double gg;   // 4 |g|^2
  };

  struct Track {
    std::vector<Complex> J;
    std::vector<Complex> M{Complex{}};  // M[k] = sum_cells m (4 conj(f) g)^k
    std::vector<Complex> powers;

    template <class Pick>
    void extend(unsigned n, double c, const std::vector<CellData>& cells, Pick pick) {
      if (powers.empty()) powers.assign(cells.size(), Complex(1.0, 0.0));
      Complex mk{};
      for (std::size_t i = 0; i < cells.size(); ++i) {
        powers[i] *= pick(cells[i]);
        mk += cells[i].measure * powers[i];
      }
      M.push_back(mk);
      Complex acc{};
      for (unsigned k = 0; k < n; ++k) acc += M[k + 1] * J[n - k - 1];
      J.push_back(c / (2.0 * n) * acc);
    }
  };

  double sup_rate(double s2, double l2, unsigned m) const {
    // r(m) = 4 s2 - (4 s2 - 2 c l2)/m is monotone in m.
    const double limit = 4.0 * s2;
    const double at_m = 4.0 * (m - 1.0) / m * s2 + 2.0 * c_ * l2 / m;
    return std::max(limit, at_m);
  }

  double c_;
  std::vector<CellData> cells_;
  double sup_f_ = 0, sup_g_ = 0, l2_f_ = 0, l2_g_ = 0;
  Track fg_, ff_, gg_;
  Complex partial_{};
};

/// sum_n I_n/(n!)^2 truncated once the rigorous tail bound drops below tol.
template <Scalar S>
SeriesResult exp_inner_series(const StepFunction<S>& f, const StepFunction<S>& g, double c, double tol = 1e-10,
                              unsigned n_max = 400) {
  if (!exists_exponential(f).exists || !exists_exponential(g).exists)
    throw Error(ErrorKind::DomainViolation, "the exponential vector does not exist (need ||f||_inf < 1/2)");
  SeriesEngine engine(f, g, c);
  SeriesDiagnostics diag;
  for (;;) {
    const double r = engine.ratio();
    const double tail = engine.tail_bound();
    diag.truncation_order = engine.order();
    diag.partial_sum = engine.partial_sum();
    diag.tail_bound = tail;
    diag.ratio_estimate = r;
    if (r < 1.0 && tail <= tol) {
      diag.converged = true;
      break;
    }
    if (engine.order() >= n_max) {
      throw Error(ErrorKind::NoConvergenceWithinBudget,
                  "tail bound " + std::to_string(tail) + " above tolerance after " + std::to_string(n_max) + " orders");
    }
    engine.advance();
  }
  return {diag.partial_sum, diag};
}

/// Partial sums of sum_n I_n/(n!)^2 for n = 0..N, with no existence
/// precondition (used to witness divergence).
template <Scalar S>
std::vector<SeriesEngine::Row> series_trajectory(const StepFunction<S>& f, const StepFunction<S>& g, double c,
                                                 unsigned n_max) {
  SeriesEngine engine(f, g, c);
  std::vector<SeriesEngine::Row> rows{engine.row()};
  for (unsigned n = 1; n <= n_max; ++n) {
    engine.advance();
    rows.push_back(engine.row());
  }
  return rows;
}

/// exp(-(c/2) * integral Ln(1 - 4 conj(f) g)). Only needs 4||f||_inf ||g||_inf < 1,
/// which is weaker than both exponential vectors existing.
template <Scalar S>
Complex exp_inner_closed(const StepFunction<S>& f, const StepFunction<S>& g, double c) {
  if (!(c > 0)) throw Error(ErrorKind::InvalidArgument, "the constant c must be positive");
  auto [fs, gs] = detail::shared(f, g);
  return std::exp(-0.5 * c * log_integral(fs, gs));
}

/// Compares n! * [t^n] <Psi(g), Psi(t f)> (exact power-series expansion of
/// the closed form) with I_n(g,f)/n!. Returns the relative discrepancy.
template <Scalar S>
double derivative_coefficient_check(const StepFunction<S>& f, const StepFunction<S>& g, unsigned n,
                                    const real_t<S>& c) {
  if (!exists_exponential(f).exists || !exists_exponential(g).exists)
    throw Error(ErrorKind::DomainViolation, "derivative check needs both exponential vectors to exist");
  detail::require_positive_c<S>(c);
  auto [fs, gs] = detail::shared(f, g);
  using R = real_t<S>;
  const S zero = scalar_traits<S>::from_real(R(0));

  // log <Psi(g),Psi(tf)> = sum_k L_k t^k, L_k = (c/2)(4^k/k) sum_cells m (conj(g) f)^k
  std::vector<S> L(n + 1, zero);
  for (unsigned k = 1; k <= n; ++k) {
    const S mk = moment(gs, fs, static_cast<int>(k));
    L[k] = scalar_traits<S>::from_real(c * scalar_traits<S>::real_from_int(BigInt(1) << (2 * k)) / R(2 * k)) * mk;
  }
  // exp of a power series: n E_n = sum_{k=1}^n k L_k E_{n-k}
  std::vector<S> E(n + 1, zero);
  E[0] = scalar_traits<S>::from_real(R(1));
  for (unsigned m = 1; m <= n; ++m) {
    S acc = zero;
    for (unsigned k = 1; k <= m; ++k) acc += scalar_traits<S>::from_real(R(k)) * L[k] * E[m - k];
    E[m] = acc * scalar_traits<S>::from_real(R(1) / R(m));
  }
  const S nfact = scalar_traits<S>::from_int(factorial(n));
  const S lhs = nfact * E[n];
  const S rhs = nth_inner(gs, fs, n, c) * scalar_traits<S>::from_real(R(1) / scalar_traits<S>::real_from_int(factorial(n)));
  const Complex diff = to_complex(lhs - rhs);
  const double scale_ = std::abs(to_complex(rhs));
  if (scale_ == 0.0) return std::abs(diff);
  return std::abs(diff) / scale_;
}

}  // namespace qfock

#endif  // QFOCK_FOCK_CORE_HPP
