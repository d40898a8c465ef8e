#include <catch_amalgamated.hpp>

#include <cmath>

#include "qfock/gram.hpp"
#include "qfock/random.hpp"

using namespace qfock;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

FloatFunction level(double v, long a = 0, long b = 1) {
  return indicator<Complex>(Rational(a), Rational(b), Complex(v, 0.0));
}

}  // namespace

TEST_CASE("PSD checks on small matrices", "[gram]") {
  CHECK(is_psd(CMatrix::Identity(3, 3)));
  CMatrix m(2, 2);
  m << 1, 2, 2, 1;
  CHECK_FALSE(is_psd(m));
  CHECK_THAT(hermitian_spectrum(m).min_eigenvalue, WithinAbs(-1.0, 1e-14));
  CMatrix bad(2, 2);
  bad << 1, 2, 0, 1;
  CHECK_THROWS_MATCHES(is_psd(bad), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.kind() == ErrorKind::NotHermitian; }));
  CHECK_THROWS_AS(verify_schur_powers(bad, 3), Error);
}

TEST_CASE("Schur powers", "[gram]") {
  CMatrix m(2, 2);
  m << 2, Complex(0, 1), Complex(0, -1), 1;
  CHECK(hadamard_power(m, 1) == m);
  Eigen::VectorXcd v(3);
  v << Complex(1, 1), 0.5, Complex(-2, 0.25);
  const CMatrix r1 = v * v.adjoint();
  for (unsigned n = 1; n <= 5; ++n) {
    Eigen::VectorXcd vn = v.unaryExpr([n](const Complex& z) { return std::pow(z, static_cast<int>(n)); });
    CHECK((hadamard_power(r1, n) - vn * vn.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
  }
  RandomSource rng(51);
  for (int i = 0; i < 10; ++i) {
    CMatrix x(5, 5);
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) x(a, b) = rng.complex_float(1.0, true);
    CMatrix p = x * x.adjoint();
    p = 0.5 * (p + p.adjoint()).eval();
    CHECK(verify_schur_powers(p, 6));
  }
}

TEST_CASE("Gram matrix of two constants", "[gram][golden]") {
  const std::vector<FloatFunction> fs{level(0.1), level(0.2)};
  const auto r = gram_matrix(std::span<const FloatFunction>(fs), 1.0);
  CHECK_THAT(r.matrix(0, 0).real(), WithinRel(std::pow(0.96, -0.5), 1e-14));
  CHECK_THAT(r.matrix(1, 1).real(), WithinRel(std::pow(0.84, -0.5), 1e-14));
  CHECK_THAT(r.matrix(0, 1).real(), WithinRel(std::pow(0.92, -0.5), 1e-14));
  const Complex det = r.matrix.determinant();
  CHECK_THAT(det.real(), WithinAbs(0.0266, 5e-5));
  CHECK(r.psd);
  CHECK(r.independent);
  CHECK(r.pairwise_distinct[0][1]);
}

TEST_CASE("single function Gram matrix", "[gram]") {
  const std::vector<FloatFunction> fs{level(0.3, 0, 2)};
  const auto r = gram_matrix(std::span<const FloatFunction>(fs), 1.5);
  CHECK_THAT(r.matrix(0, 0).real(), WithinRel(std::pow(1 - 4 * 0.09, -1.5 * 2 / 2), 1e-14));
}

TEST_CASE("independence verdicts", "[gram]") {
  const std::vector<FloatFunction> three{level(0.1), level(0.2), level(0.3)};
  const auto v = linear_independence(std::span<const FloatFunction>(three), 1.0);
  CHECK(v.independent);
  CHECK(v.min_eigenvalue > 0);
  CHECK(v.hypothesis_holds);

  const std::vector<FloatFunction> dup{level(0.1), level(0.2), level(0.1)};
  const auto d = linear_independence(std::span<const FloatFunction>(dup), 1.0);
  CHECK_FALSE(d.independent);
  CHECK_FALSE(d.hypothesis_holds);
  CHECK(d.min_eigenvalue < 1e-10 * d.spectral_norm);

  // equal as functions even though written on different cells
  IntervalSpec<Complex> halves{{{Rational(0), Rational(1, 2), Complex(0.2, 0)}, {Rational(1, 2), Rational(1), Complex(0.2, 0)}}};
  auto split = from_intervals(halves);
  auto whole = level(0.2);
  const std::vector<FloatFunction> same{split, whole};
  CHECK_FALSE(linear_independence(std::span<const FloatFunction>(same), 1.0).independent);

  const std::vector<FloatFunction> outside{level(0.1), level(0.5)};
  CHECK_THROWS_MATCHES(gram_matrix(std::span<const FloatFunction>(outside), 1.0), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.kind() == ErrorKind::DomainViolation; }));
}

TEST_CASE("kernel and Gram positivity on random families", "[gram][property]") {
  RandomSource rng(52);
  for (int i = 0; i < 15; ++i) {
    std::vector<FloatFunction> fam;
    for (int j = 0; j < 4; ++j) fam.push_back(rng.float_function(rng.interval_partition(3), 0.45, true));
    const auto r = gram_matrix(std::span<const FloatFunction>(fam), 1.0, 1e-10, 2);
    CHECK(r.psd);
    CHECK(is_psd(r.kernel_matrix, 1e-12));
    CHECK(hermitian_defect(r.matrix) == 0.0);
    // independence follows from distinctness
    CHECK(r.independent);
  }
}

TEST_CASE("threaded Gram matrix matches serial", "[gram]") {
  RandomSource rng(53);
  std::vector<FloatFunction> fam;
  for (int j = 0; j < 6; ++j) fam.push_back(rng.float_function(rng.interval_partition(2), 0.4, true));
  const auto a = gram_matrix(std::span<const FloatFunction>(fam), 1.0, 1e-10, 1);
  const auto b = gram_matrix(std::span<const FloatFunction>(fam), 1.0, 1e-10, 4);
  CHECK(a.matrix == b.matrix);
  CHECK(a.min_eigenvalue == b.min_eigenvalue);
}
