#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

#include "qfock/fock_core.hpp"
#include "qfock/normal_order.hpp"
#include "qfock/random.hpp"

using namespace qfock;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

CRational q(long p, long d = 1) { return CRational(Rational(p, d)); }

ExactFunction level(long p, long d, long a = 0, long b = 1) {
  return indicator<CRational>(Rational(a), Rational(b), q(p, d));
}

bool kind_is(const Error& e, ErrorKind k) { return e.kind() == k; }

}  // namespace

TEST_CASE("golden inner products for f = g = (1/4) chi_[0,1), c = 1", "[fock_core][golden]") {
  // I_1, I_2 by hand from the commutation relations; I_3, I_4 from the oracle.
  const auto f = level(1, 4);
  const auto table = inner_table(f, f, 4, Rational(1)).values;
  CHECK(table[0] == q(1));
  CHECK(table[1] == q(1, 8));
  CHECK(table[2] == q(3, 32));
  CHECK(table[3] == q(45, 256));
  CHECK(table[4] == q(315, 512));
  for (unsigned n = 0; n <= 4; ++n) CHECK(oracle_nth_inner(f, f, n, Rational(1)) == table[n]);
}

TEST_CASE("low orders of nth_inner", "[fock_core]") {
  RandomSource rng(21);
  for (int i = 0; i < 20; ++i) {
    auto f = rng.exact_function(rng.interval_partition(3), Rational(1), 4, true);
    auto g = rng.exact_function(rng.interval_partition(2), Rational(1), 4, true);
    const Rational c(rng.between(1, 5), rng.between(1, 3));
    auto [fs, gs] = common_refinement(f, g);
    CHECK(nth_inner(f, g, 0, c) == q(1));
    CHECK(nth_inner(f, g, 1, c) == CRational(2 * c) * moment(fs, gs, 1));
  }
}

TEST_CASE("float and exact recursions agree", "[fock_core]") {
  RandomSource rng(22);
  for (int i = 0; i < 10; ++i) {
    auto p = rng.interval_partition(3);
    auto f = rng.exact_function(p, Rational(1, 2), 6, true);
    auto g = rng.exact_function(p, Rational(1, 2), 6, true);
    const auto exact = inner_table(f, g, 8, Rational(3, 2)).values;
    const auto approx = inner_table(to_float(f), to_float(g), 8, 1.5).values;
    const auto J = normalized_table(to_float(f), to_float(g), 8, 1.5);
    for (unsigned n = 0; n <= 8; ++n) {
      const Complex e = to_complex(exact[n]);
      const double scale = std::max(1e-300, std::abs(e));
      CHECK(std::abs(approx[n] - e) <= 1e-12 * scale);
      const double nf = std::tgamma(n + 1.0);
      CHECK(std::abs(J[n] * nf * nf - e) <= 1e-12 * std::max(scale, 1e-12));
    }
  }
}

TEST_CASE("nth_inner is Hermitian and positive", "[fock_core][property]") {
  RandomSource rng(23);
  for (int i = 0; i < 20; ++i) {
    auto f = rng.exact_function(rng.interval_partition(3), Rational(1), 5, true);
    auto g = rng.exact_function(rng.interval_partition(3), Rational(1), 5, true);
    const auto fg = inner_table(f, g, 10, Rational(1)).values;
    const auto gf = inner_table(g, f, 10, Rational(1)).values;
    const auto ff = inner_table(f, f, 10, Rational(1)).values;
    for (unsigned n = 0; n <= 10; ++n) {
      CHECK(fg[n] == conj(gf[n]));
      CHECK(ff[n].im == 0);
      CHECK(ff[n].re >= 0);
    }
  }
}

TEST_CASE("nth_inner scales as (conj(lambda) mu)^n", "[fock_core][property]") {
  RandomSource rng(24);
  for (int i = 0; i < 20; ++i) {
    auto p = rng.interval_partition(2);
    auto f = rng.exact_function(p, Rational(1), 4, true);
    auto g = rng.exact_function(p, Rational(1), 4, true);
    const CRational lambda = rng.complex_rational(Rational(2), 3, true);
    const CRational mu = rng.complex_rational(Rational(2), 3, true);
    const auto base = inner_table(f, g, 7, Rational(2)).values;
    const auto scaled = inner_table(scale(lambda, f), scale(mu, g), 7, Rational(2)).values;
    for (unsigned n = 0; n <= 7; ++n) CHECK(scaled[n] == integer_power(conj(lambda) * mu, n) * base[n]);
  }
}

TEST_CASE("Gram matrices of fixed-order vectors are PSD", "[fock_core][property]") {
  RandomSource rng(25);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<FloatFunction> fam;
    for (int i = 0; i < 4; ++i) fam.push_back(rng.float_function(rng.interval_partition(2), 0.8, true));
    for (unsigned n = 1; n <= 5; ++n) {
      Eigen::MatrixXcd m(4, 4);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = nth_inner(fam[i], fam[j], n, 1.0);
      m = 0.5 * (m + m.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("annihilator matrix element", "[fock_core]") {
  RandomSource rng(26);
  for (int i = 0; i < 15; ++i) {
    auto p = rng.interval_partition(3);
    auto f = rng.exact_function(p, Rational(1), 4, true);
    auto g = rng.exact_function(p, Rational(1), 4, true);
    auto h = rng.exact_function(rng.interval_partition(2), Rational(1), 4, true);
    const Rational c(rng.between(1, 3));
    for (unsigned n = 1; n <= 4; ++n) CHECK(annihilator_matrix_element(f, f, g, n, c) == nth_inner(f, g, n, c));
    auto [hs, gs] = common_refinement(h, g);
    CHECK(annihilator_matrix_element(f, h, g, 1, c) == CRational(2 * c) * moment(hs, gs, 1));
    // against the oracle: <Phi, B_f^(n-1) B_h B+^n_g Phi>
    for (unsigned n = 1; n <= 3; ++n) {
      auto word = power(Generator::annihilator(f), n - 1);
      word.push_back(Generator::annihilator(h));
      word = concat(word, power(Generator::creator(g), n));
      CHECK(annihilator_matrix_element(f, h, g, n, c) == vacuum_expectation(word, c));
    }
  }
  const auto a = level(1, 3, 0, 1);
  const auto b = level(1, 5, 2, 3);
  CHECK(annihilator_matrix_element(a, a, b, 3, Rational(1)).is_zero());
}

TEST_CASE("existence verdicts", "[fock_core]") {
  const auto v = exists_exponential(level(1, 4));
  CHECK(v.exists);
  CHECK(v.exact_margin == Rational(1, 4));
  const auto w = exists_exponential(level(1, 2));
  CHECK_FALSE(w.exists);
  REQUIRE(w.exact_margin);
  CHECK(*w.exact_margin == 0);
  CHECK(w.margin == 0.0);
  const auto e = exists_exponential(ExactFunction{});
  CHECK(e.exists);
  CHECK(e.exact_margin == Rational(1, 2));
  // 3/8 + i/2 has modulus 5/8
  const auto z = exists_exponential(indicator<CRational>(Rational(0), Rational(1), CRational(Rational(3, 8), Rational(1, 2))));
  CHECK_FALSE(z.exists);
  CHECK(z.exact_margin == Rational(-1, 8));
  // just inside, irrational modulus
  const auto r = exists_exponential(indicator<CRational>(Rational(0), Rational(1), CRational(Rational(1, 3), Rational(1, 3))));
  CHECK(r.exists);
  CHECK_FALSE(r.exact_margin);
  CHECK_THAT(r.margin, WithinAbs(0.5 - std::sqrt(2.0) / 3.0, 1e-15));
}

TEST_CASE("exponential series", "[fock_core][golden]") {
  const auto f = level(1, 4);
  const auto s = exp_inner_series(f, f, 1.0, 1e-12);
  CHECK(s.diagnostics.converged);
  CHECK(s.diagnostics.tail_bound <= 1e-12);
  CHECK_THAT(s.value.real(), WithinAbs(2.0 / std::sqrt(3.0), 1e-12));
  CHECK_THAT(exp_inner_closed(f, f, 1.0).real(), WithinAbs(2.0 / std::sqrt(3.0), 1e-15));

  const ExactFunction zero;
  CHECK(exp_inner_series(zero, zero, 1.0).value == Complex(1.0, 0.0));
  CHECK(exp_inner_closed(f, zero, 1.0) == Complex(1.0, 0.0));

  const auto far = level(1, 4, 2, 3);
  CHECK_THAT(std::abs(exp_inner_series(f, far, 1.0).value - 1.0), WithinAbs(0.0, 1e-15));

  // rho chi_I against (1 - 4 rho^2)^(-|I|/2)
  const auto r = indicator<CRational>(Rational(0), Rational(3), q(2, 5));
  CHECK_THAT(exp_inner_closed(r, r, 1.0).real(), WithinRel(std::pow(1 - 4 * 0.16, -1.5), 1e-14));
  CHECK_THAT(exp_inner_series(r, r, 1.0).value.real(), WithinRel(std::pow(1 - 4 * 0.16, -1.5), 1e-9));
}

TEST_CASE("series errors", "[fock_core]") {
  const auto half = level(1, 2);
  CHECK_THROWS_MATCHES(exp_inner_series(half, half, 1.0), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return kind_is(e, ErrorKind::DomainViolation); }));
  const auto close = indicator<CRational>(Rational(0), Rational(1), q(499, 1000));
  CHECK_THROWS_MATCHES(exp_inner_series(close, close, 1.0, 1e-10, 50), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return kind_is(e, ErrorKind::NoConvergenceWithinBudget); }));
  CHECK_THROWS_AS(inner_table(half, half, 3, Rational(0)), Error);
}

TEST_CASE("tail bound is rigorous", "[fock_core][property]") {
  RandomSource rng(27);
  for (int i = 0; i < 20; ++i) {
    auto p = rng.interval_partition(3);
    auto f = rng.float_function(p, 0.45, true);
    auto g = rng.float_function(p, 0.45, true);
    const auto rows = series_trajectory(f, g, 1.0, 600);
    const Complex limit = exp_inner_closed(f, g, 1.0);
    for (unsigned n = 0; n < 200; n += 7)
      if (std::isfinite(rows[n].tail_bound))
        CHECK(std::abs(limit - rows[n].partial_sum) <= rows[n].tail_bound * (1 + 1e-9) + 1e-13);
  }
}

TEST_CASE("divergence at the boundary", "[fock_core]") {
  // f = (1/2) chi_J: the terms satisfy J_n >= (c|J|/2)/n
  for (long len : {1L, 2L, 3L}) {
    const auto f = indicator<CRational>(Rational(0), Rational(len), q(1, 2));
    const auto rows = series_trajectory(f, f, 1.0, 60);
    for (unsigned n = 1; n <= 60; ++n) CHECK(rows[n].term.real() >= 0.5 * len / n * (1 - 1e-12));
  }
  const auto f = level(1, 2);
  const double b = norm_growth_bound(f, 200, 1.0) / (200.0 * 200.0);
  CHECK_THAT(b, WithinAbs(1.0, 0.01));
}

TEST_CASE("norm growth bound", "[fock_core]") {
  const auto f = from_cells<CRational>({{"a", Rational(1), q(1, 4)}, {"b", Rational(3), q(1, 8)}});
  CHECK_THAT(norm_growth_bound(f, 1, 1.0), WithinAbs(2.0 * 7.0 / 64.0, 1e-15));
  CHECK_THAT(norm_growth_bound(f, 3, 2.0), WithinAbs(4.0 * 3 * 2 / 16.0 + 2.0 * 3 * 2 * 7.0 / 64.0, 1e-15));
  // ||B+^n_f Phi||^2 <= growth(n) ||B+^(n-1)_f Phi||^2
  const auto I = inner_table(f, f, 10, Rational(1)).values;
  for (unsigned n = 1; n <= 10; ++n) CHECK(to_double(I[n].re) <= norm_growth_bound(f, n, 1.0) * to_double(I[n - 1].re) * (1 + 1e-12));
}

TEST_CASE("derivative coefficient check", "[fock_core]") {
  const auto f = level(1, 4);
  const auto g = indicator<CRational>(Rational(0), Rational(1), CRational(Rational(1, 5), Rational(-1, 7)));
  for (unsigned n = 0; n <= 6; ++n) CHECK(derivative_coefficient_check(f, g, n, Rational(1)) == 0.0);
  for (unsigned n = 0; n <= 6; ++n) CHECK(derivative_coefficient_check(to_float(f), to_float(g), n, 1.0) <= 1e-12);
  CHECK_THROWS_AS(derivative_coefficient_check(level(1, 2), g, 2, Rational(1)), Error);
}
