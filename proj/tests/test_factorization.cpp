#include <catch_amalgamated.hpp>

#include <cmath>

#include "qfock/factorization.hpp"
#include "qfock/random.hpp"

using namespace qfock;
using Catch::Matchers::WithinRel;

namespace {

CRational q(long p, long d = 1) { return CRational(Rational(p, d)); }

PartitionPtr unit_cells(int count) {
  std::vector<Cell> cells;
  for (int i = 0; i < count; ++i) cells.push_back({interval_id(i, i + 1), Rational(1), Span1D{i, i + 1}});
  return std::make_shared<const Partition>(std::move(cells));
}

}  // namespace

TEST_CASE("restrict keeps the partition", "[factorization]") {
  const ExactFunction f(unit_cells(3), {q(1), q(2), q(3)});
  const std::vector<std::string> part{"[0,1)", "[2,3)"};
  const auto r = restrict(f, std::span<const std::string>(part));
  CHECK(r.shares_partition_with(f));
  CHECK(r.value(0) == q(1));
  CHECK(r.value(1).is_zero());
  CHECK(r.value(2) == q(3));
  const std::vector<std::string> bad{"[5,6)"};
  CHECK_THROWS_MATCHES(restrict(f, std::span<const std::string>(bad)), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.kind() == ErrorKind::UnknownCellId; }));
}

TEST_CASE("split validation", "[factorization]") {
  const auto p = unit_cells(3);
  CHECK_NOTHROW(validate_split(*p, {{{"[0,1)"}, {"[1,2)", "[2,3)"}}}));
  CHECK_THROWS_AS(validate_split(*p, {{{"[0,1)"}, {"[0,1)", "[1,2)", "[2,3)"}}}), Error);
  CHECK_THROWS_AS(validate_split(*p, {{{"[0,1)"}, {"[1,2)"}}}), Error);
  CHECK_THROWS_AS(validate_split(*p, {{{"[0,1)"}, {"[1,2)", "x"}}}), Error);
}

TEST_CASE("exponential factorization on a split interval", "[factorization]") {
  const ExactFunction f(unit_cells(2), {q(1, 4), q(1, 4)});
  const auto r = check_exponential_factorization(to_float(f), to_float(f), {{{"[0,1)"}, {"[1,2)"}}}, 1.0);
  CHECK(r.passed);
  CHECK_THAT(r.closed_whole.real(), WithinRel(1.0 / 0.75, 1e-14));
  CHECK_THAT(r.closed_product.real(), WithinRel(1.0 / 0.75, 1e-14));
  CHECK_THAT(r.series_product.real(), WithinRel(1.0 / 0.75, 1e-10));

  const auto single = check_exponential_factorization(to_float(f), to_float(f), {{{"[0,1)", "[1,2)"}}}, 1.0);
  CHECK(single.passed);
  CHECK(single.closed_rel_error == 0.0);
}

TEST_CASE("exponential factorization on random 4-cell functions", "[factorization][property]") {
  RandomSource rng(41);
  for (int i = 0; i < 10; ++i) {
    auto p = rng.interval_partition(4);
    auto f = rng.float_function(p, 0.45, true);
    auto g = rng.float_function(p, 0.45, true);
    RegionSplit split{{{p->cells()[0].id, p->cells()[2].id}, {p->cells()[1].id, p->cells()[3].id}}};
    const auto r = check_exponential_factorization(f, g, split, 1.5, 1e-10);
    CHECK(r.passed);
    CHECK(r.closed_rel_error <= 1e-10);
    CHECK(r.series_rel_error <= 1e-10);
  }
}

TEST_CASE("exponential factorization requires existence", "[factorization]") {
  const ExactFunction f(unit_cells(2), {q(1, 2), q(1, 4)});
  CHECK_THROWS_MATCHES(check_exponential_factorization(to_float(f), to_float(f), {{{"[0,1)"}, {"[1,2)"}}}, 1.0), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.kind() == ErrorKind::DomainViolation; }));
}

TEST_CASE("order-n binomial identity", "[factorization]") {
  RandomSource rng(42);
  const RegionSplit split{{{"[0,1)", "[2,3)"}, {"[1,2)"}}};
  for (int i = 0; i < 10; ++i) {
    const auto p = unit_cells(3);
    auto f = rng.exact_function(p, Rational(1), 4, true);
    auto g = rng.exact_function(p, Rational(1), 4, true);
    const Rational c(rng.between(1, 3), rng.between(1, 2));
    for (unsigned n = 0; n <= 6; ++n) CHECK(check_order_n_factorization(f, g, split, n, c).discrepancy.is_zero());
    const auto zero = check_order_n_factorization(f, g, split, 0, c);
    CHECK(zero.lhs == q(1));
    CHECK(zero.rhs == q(1));
  }
  // a perturbed split value breaks it
  const ExactFunction f(unit_cells(3), {q(1, 3), q(1, 5), q(-1, 4)});
  const auto r = check_order_n_factorization(f, f, split, 3, Rational(1));
  CHECK(r.discrepancy.is_zero());
  CHECK_THROWS_AS(check_order_n_factorization(f, f, {{{"[0,1)"}, {"[1,2)"}, {"[2,3)"}}}, 3, Rational(1)), Error);
}
