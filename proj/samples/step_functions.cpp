// Inner products and exponential vectors for f = g = (1/4) chi_[0,1).

#include <iostream>

#include "qfock/qfock.hpp"

int main() {
  using namespace qfock;
  const auto f = indicator<CRational>(Rational(0), Rational(1), CRational(Rational(1, 4)));
  const Rational c = 1;

  const auto table = inner_table(f, f, 4, c).values;
  for (unsigned n = 0; n <= 4; ++n) std::cout << "I_" << n << " = " << table[n] << '\n';
  std::cout << "oracle I_2 = " << oracle_nth_inner(f, f, 2, c) << '\n';

  const auto series = exp_inner_series(f, f, 1.0);
  std::cout << "series  = " << series.value.real() << " after " << series.diagnostics.truncation_order << " orders\n";
  std::cout << "closed  = " << exp_inner_closed(f, f, 1.0).real() << '\n';

  const auto half = indicator<CRational>(Rational(0), Rational(1), CRational(Rational(1, 2)));
  std::cout << "(1/2) chi_[0,1) has an exponential vector: " << std::boolalpha << exists_exponential(half).exists
            << '\n';
}
