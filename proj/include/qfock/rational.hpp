#ifndef QFOCK_RATIONAL_HPP
#define QFOCK_RATIONAL_HPP

// The two numeric towers used throughout: exact complex rationals built on
// boost::multiprecision, and std::complex<double>. Conversion is one-way,
// exact to float.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <compare>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "qfock/error.hpp"

namespace qfock {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Complex = std::complex<double>;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }
inline double to_double(double x) { return x; }

inline std::string to_string(const Rational& q) {
  if (boost::multiprecision::denominator(q) == 1) return boost::multiprecision::numerator(q).str();
  return boost::multiprecision::numerator(q).str() + "/" + boost::multiprecision::denominator(q).str();
}

/// Parses "p", "-p" or "p/q" into an exact rational. Returns nullopt for
/// anything else (decimals included).
inline std::optional<Rational> parse_rational(std::string_view text) {
  auto is_int = [](std::string_view s) {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    if (s.empty()) return false;
    for (char ch : s)
      if (ch < '0' || ch > '9') return false;
    return true;
  };
  auto to_big = [](std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    return BigInt(std::string(s));
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    if (!is_int(text)) return std::nullopt;
    return Rational(to_big(text));
  }
  auto num = text.substr(0, slash);
  auto den = text.substr(slash + 1);
  if (!is_int(num) || !is_int(den)) return std::nullopt;
  BigInt d = to_big(den);
  if (d == 0) return std::nullopt;
  return Rational(to_big(num), d);
}

/// Exact square root of a nonnegative rational when both numerator and
/// denominator are perfect squares.
inline std::optional<Rational> exact_sqrt(const Rational& q) {
  if (q < 0) return std::nullopt;
  const BigInt n = boost::multiprecision::numerator(q);
  const BigInt d = boost::multiprecision::denominator(q);
  const BigInt rn = boost::multiprecision::sqrt(n);
  const BigInt rd = boost::multiprecision::sqrt(d);
  if (rn * rn != n || rd * rd != d) return std::nullopt;
  return Rational(rn, rd);
}

/// Complex number with exact rational parts.
struct CRational {
  Rational re{0};
  Rational im{0};

  CRational() = default;
  CRational(int r) : re(r) {}  // NOLINT(google-explicit-constructor)
  CRational(Rational r) : re(std::move(r)) {}  // NOLINT(google-explicit-constructor)
  CRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  bool is_zero() const { return re == 0 && im == 0; }
  Rational norm() const { return re * re + im * im; }

  CRational& operator+=(const CRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  CRational& operator-=(const CRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  CRational& operator*=(const CRational& o) {
    if (o.im == 0) {
      re *= o.re;
      im *= o.re;
      return *this;
    }
    Rational r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  CRational& operator/=(const CRational& o) {
    const Rational d = o.norm();
    if (d == 0) throw Error(ErrorKind::InvalidArgument, "division by zero");
    Rational r = (re * o.re + im * o.im) / d;
    im = (im * o.re - re * o.im) / d;
    re = std::move(r);
    return *this;
  }

  friend CRational operator+(CRational a, const CRational& b) { return a += b; }
  friend CRational operator-(CRational a, const CRational& b) { return a -= b; }
  friend CRational operator*(CRational a, const CRational& b) { return a *= b; }
  friend CRational operator/(CRational a, const CRational& b) { return a /= b; }
  friend CRational operator-(const CRational& a) { return {-a.re, -a.im}; }

  friend bool operator==(const CRational& a, const CRational& b) { return a.re == b.re && a.im == b.im; }
  // Lexicographic (re, im); only used to canonicalize, not a field order.
  friend std::strong_ordering operator<=>(const CRational& a, const CRational& b) {
    if (a.re < b.re) return std::strong_ordering::less;
    if (b.re < a.re) return std::strong_ordering::greater;
    if (a.im < b.im) return std::strong_ordering::less;
    if (b.im < a.im) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend std::ostream& operator<<(std::ostream& os, const CRational& z) {
    os << to_string(z.re);
    if (z.im != 0) os << (z.im < 0 ? " - " : " + ") << to_string(z.im < 0 ? Rational(-z.im) : z.im) << "i";
    return os;
  }
};

inline CRational conj(const CRational& z) { return {z.re, -z.im}; }
inline Complex to_complex(const CRational& z) { return {to_double(z.re), to_double(z.im)}; }
inline Complex to_complex(const Complex& z) { return z; }

/// Uniform interface over the exact and floating towers.
template <class S>
struct scalar_traits;

template <>
struct scalar_traits<CRational> {
  using real_type = Rational;
  static constexpr bool exact = true;

  static CRational conj(const CRational& z) { return qfock::conj(z); }
  static Rational abs2(const CRational& z) { return z.norm(); }
  static bool is_zero(const CRational& z) { return z.is_zero(); }
  static CRational from_real(const Rational& r) { return CRational(r); }
  static CRational from_int(const BigInt& k) { return CRational(Rational(k)); }
  static Rational real_from_int(const BigInt& k) { return Rational(k); }
  static double real_to_double(const Rational& r) { return to_double(r); }
};

template <>
struct scalar_traits<Complex> {
  using real_type = double;
  static constexpr bool exact = false;

  static Complex conj(const Complex& z) { return std::conj(z); }
  static double abs2(const Complex& z) { return std::norm(z); }
  static bool is_zero(const Complex& z) { return z == Complex{}; }
  static Complex from_real(double r) { return {r, 0.0}; }
  static Complex from_int(const BigInt& k) { return {k.convert_to<double>(), 0.0}; }
  static double real_from_int(const BigInt& k) { return k.convert_to<double>(); }
  static double real_to_double(double r) { return r; }
};

template <class S>
concept Scalar = requires { typename scalar_traits<S>::real_type; };

template <Scalar S>
using real_t = typename scalar_traits<S>::real_type;

template <Scalar S>
constexpr bool is_exact_v = scalar_traits<S>::exact;

template <Scalar S>
S integer_power(S base, unsigned k) {
  S result = scalar_traits<S>::from_real(real_t<S>(1));
  while (k) {
    if (k & 1u) result *= base;
    base *= base;
    k >>= 1u;
  }
  return result;
}

inline BigInt factorial(unsigned n) {
  BigInt r = 1;
  for (unsigned i = 2; i <= n; ++i) r *= i;
  return r;
}

inline BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

}  // namespace qfock

#endif  // QFOCK_RATIONAL_HPP
