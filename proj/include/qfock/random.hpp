#ifndef QFOCK_RANDOM_HPP
#define QFOCK_RANDOM_HPP

// Seeded generators of random admissible inputs, shared by the property
// suites of the CLI and the test binaries. Only std::mt19937_64 output is
// used directly (never std::*_distribution), so a seed reproduces the same
// inputs on every standard library.

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "qfock/rational.hpp"
#include "qfock/stepfn.hpp"

namespace qfock {

class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t next() { return rng_(); }

  /// Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : rng_() % n; }

  /// Uniform in [lo, hi].
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  bool coin() { return (rng_() >> 63) != 0; }

  /// p/q with |p| <= max_num, 1 <= q <= max_den.
  Rational rational(int max_num, int max_den) {
    return Rational(between(-max_num, max_num), between(1, max_den));
  }

  /// Complex rational with |z| < bound (strictly), denominators up to max_den.
  CRational complex_rational(const Rational& bound, int max_den, bool allow_imag) {
    const Rational b2 = bound * bound;
    for (;;) {
      const int den = between(1, max_den);
      const int lim = static_cast<int>(to_double(bound) * den) + 1;
      CRational z(Rational(between(-lim, lim), den), allow_imag ? Rational(between(-lim, lim), den) : Rational(0));
      if (z.norm() < b2) return z;
    }
  }

  Complex complex_float(double bound, bool allow_imag) {
    for (;;) {
      Complex z((2 * uniform() - 1) * bound, allow_imag ? (2 * uniform() - 1) * bound : 0.0);
      if (std::abs(z) < bound) return z;
    }
  }

  /// Consecutive half-open intervals starting at 0 with rational lengths in (0, max_len].
  PartitionPtr interval_partition(unsigned cells, int max_len_num = 2, int len_den = 4) {
    std::vector<Cell> out;
    Rational a = 0;
    for (unsigned i = 0; i < cells; ++i) {
      Rational len(between(1, max_len_num * len_den), len_den);
      if (coin()) a += Rational(between(0, len_den), len_den);  // occasional gap
      out.push_back({interval_id(a, a + len), len, Span1D{a, a + len}});
      a += len;
    }
    return std::make_shared<const Partition>(std::move(out));
  }

  ExactFunction exact_function(const PartitionPtr& p, const Rational& bound, int max_den, bool allow_imag) {
    std::vector<CRational> v;
    for (std::size_t i = 0; i < p->size(); ++i) v.push_back(complex_rational(bound, max_den, allow_imag));
    return ExactFunction(p, std::move(v));
  }

  FloatFunction float_function(const PartitionPtr& p, double bound, bool allow_imag) {
    std::vector<Complex> v;
    for (std::size_t i = 0; i < p->size(); ++i) v.push_back(complex_float(bound, allow_imag));
    return FloatFunction(p, std::move(v));
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace qfock

#endif  // QFOCK_RANDOM_HPP
