#ifndef QFOCK_SUITE_HPP
#define QFOCK_SUITE_HPP

// Randomized property checks shared by `qfock verify` and the acceptance
// binary. Inputs for every case are drawn up front from one seeded source,
// so results do not depend on the number of worker threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qfock/factorization.hpp"
#include "qfock/fock_core.hpp"
#include "qfock/gram.hpp"
#include "qfock/normal_order.hpp"
#include "qfock/parallel.hpp"
#include "qfock/random.hpp"

namespace qfock::suite {

struct PropertyResult {
  std::string name;
  bool passed = false;
  unsigned cases = 0;
  unsigned failures = 0;
  double max_discrepancy = 0.0;
  std::string detail;
};

struct Config {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  Rational c = 1;

  unsigned oracle_pairs = 50;
  unsigned oracle_max_n = 4;
  unsigned oracle_extra_cases = 5;  // additional pairs checked at oracle_max_n + 1
  unsigned identity_cases = 10;
  unsigned identity_max_n = 4;
  unsigned lemma2_cases = 3;        // per word shape
  unsigned confluence_words = 20;
  unsigned confluence_max_len = 6;
  unsigned factorization_cases = 20;
  unsigned factorization_max_n = 6;
  unsigned series_pairs = 100;
  double series_tol = 1e-10;
  double series_rel_tol = 1e-8;
  unsigned ratio_cases = 10;
  unsigned ratio_max_n = 20;
  unsigned monotonicity_pairs = 50;
  unsigned monotonicity_max_n = 10;
  unsigned schur_cases = 10;
  unsigned schur_dim = 5;
  unsigned schur_max_power = 6;
  unsigned kernel_families = 10;
  unsigned derivative_cases = 20;
  unsigned derivative_max_n = 6;
  double derivative_tol = 1e-10;
  unsigned boundary_n_max = 20000;
};

namespace detail {

struct Tally {
  unsigned cases = 0;
  unsigned failures = 0;
  double max_discrepancy = 0.0;
  std::string first_failure;

  void add(bool ok, double discrepancy, const std::string& what) {
    ++cases;
    if (std::isnan(discrepancy))
      max_discrepancy = discrepancy;
    else if (!std::isnan(max_discrepancy))
      max_discrepancy = std::max(max_discrepancy, discrepancy);
    if (!ok) {
      if (failures == 0) first_failure = what;
      ++failures;
    }
  }

  void merge(const Tally& o) {
    cases += o.cases;
    if (failures == 0 && o.failures > 0) first_failure = o.first_failure;
    failures += o.failures;
    if (std::isnan(o.max_discrepancy) || std::isnan(max_discrepancy))
      max_discrepancy = std::numeric_limits<double>::quiet_NaN();
    else
      max_discrepancy = std::max(max_discrepancy, o.max_discrepancy);
  }

  PropertyResult result(std::string name, std::string detail) const {
    PropertyResult r{std::move(name), failures == 0 && cases > 0, cases, failures, max_discrepancy, std::move(detail)};
    if (failures > 0) r.detail += "; first failure: " + first_failure;
    return r;
  }
};

/// Runs `count` independent cases, each producing its own tally, and merges
/// them in index order.
template <class Fn>
Tally run_cases(std::size_t count, unsigned jobs, Fn fn) {
  std::vector<Tally> parts(count);
  parallel_for(count, jobs, [&](std::size_t i) { parts[i] = fn(i); });
  Tally total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

inline double exact_gap(const CRational& a, const CRational& b) { return std::abs(to_complex(a - b)); }

inline ExactFunction random_exact(RandomSource& rng, unsigned max_cells, const Rational& bound, int max_den,
                                  bool allow_imag = true) {
  auto p = rng.interval_partition(static_cast<unsigned>(rng.between(1, static_cast<int>(max_cells))));
  return rng.exact_function(p, bound, max_den, allow_imag);
}

/// f and g either share one partition or live on independent ones.
inline std::pair<ExactFunction, ExactFunction> random_exact_pair(RandomSource& rng, unsigned max_cells,
                                                                 const Rational& bound, int max_den) {
  auto f = random_exact(rng, max_cells, bound, max_den);
  if (rng.coin()) return {f, rng.exact_function(f.partition_ptr(), bound, max_den, true)};
  return {f, random_exact(rng, max_cells, bound, max_den)};
}

inline PartitionPtr random_cells(RandomSource& rng, unsigned count) { return rng.interval_partition(count); }

/// Random assignment of the cells to `parts` nonempty groups.
inline RegionSplit random_split(RandomSource& rng, const Partition& p, unsigned parts) {
  RegionSplit split;
  split.parts.resize(parts);
  std::vector<std::size_t> order(p.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t group = k < parts ? k : rng.below(parts);
    split.parts[group].push_back(p.cells()[order[k]].id);
  }
  return split;
}

inline CMatrix random_psd(RandomSource& rng, unsigned dim) {
  CMatrix x(dim, dim);
  for (unsigned i = 0; i < dim; ++i)
    for (unsigned j = 0; j < dim; ++j) x(i, j) = rng.complex_float(1.0, true);
  CMatrix m = x * x.adjoint() / static_cast<double>(dim);
  return 0.5 * (m + m.adjoint());
}

}  // namespace detail

/// nth_inner against the normal-ordering oracle, exact equality.
inline PropertyResult oracle_equivalence(const Config& cfg) {
  RandomSource rng(cfg.seed ^ 0x01);
  struct Case {
    ExactFunction f, g;
    unsigned n_max;
  };
  std::vector<Case> cases;
  for (unsigned i = 0; i < cfg.oracle_pairs; ++i) {
    auto [f, g] = detail::random_exact_pair(rng, 3, Rational(1), 4);
    cases.push_back({f, g, cfg.oracle_max_n});
  }
  for (unsigned i = 0; i < cfg.oracle_extra_cases; ++i) {
    auto [f, g] = detail::random_exact_pair(rng, 3, Rational(1), 4);
    cases.push_back({f, g, cfg.oracle_max_n + 1});
  }
  OracleOptions opts;
  opts.max_order = cfg.oracle_max_n + 1;
  auto tally = detail::run_cases(cases.size(), cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto& cs = cases[i];
    const auto table = inner_table(cs.f, cs.g, cs.n_max, cfg.c).values;
    const unsigned first = i < cfg.oracle_pairs ? 0 : cs.n_max;
    for (unsigned n = first; n <= cs.n_max; ++n) {
      const auto oracle = oracle_nth_inner(cs.f, cs.g, n, cfg.c, opts);
      t.add(table[n] == oracle, detail::exact_gap(table[n], oracle),
            "pair " + std::to_string(i) + " n=" + std::to_string(n));
    }
    return t;
  });
  return tally.result("oracle_equivalence", std::to_string(cfg.oracle_pairs) + " pairs for n<=" +
                                                std::to_string(cfg.oracle_max_n) + ", " +
                                                std::to_string(cfg.oracle_extra_cases) + " pairs at n=" +
                                                std::to_string(cfg.oracle_max_n + 1));
}

/// [N_f, B+^n_g] = 2n B+^(n-1)_g B+_{fg}
inline TermSum number_commutator_rhs(const ExactFunction& f, const ExactFunction& g, unsigned n, const CRational& k) {
  auto [fs, gs] = common_refinement(f, g);
  auto word = power(Generator::creator(gs), n - 1);
  word.push_back(Generator::creator(pointwise_mul(fs, gs)));
  return TermSum::of(word, k);
}

/// [B_f, B+^n_g] = 2nc<f,g> B+^(n-1)_g + 4n B+^(n-1)_g N_{conj(f)g} + 4n(n-1) B+^(n-2)_g B+_{conj(f)g^2}
inline TermSum annihilator_commutator_rhs(const ExactFunction& f, const ExactFunction& g, unsigned n,
                                          const Rational& c) {
  auto [fs, gs] = common_refinement(f, g);
  const CRational nn(static_cast<long>(n));
  const auto fg = pointwise_mul(conj(fs), gs);
  TermSum rhs = TermSum::of(power(Generator::creator(gs), n - 1), CRational(2) * nn * CRational(c) * moment(fs, gs, 1));
  rhs += TermSum::of(concat(power(Generator::creator(gs), n - 1), {Generator::number(fg)}), CRational(4) * nn);
  if (n >= 2)
    rhs += TermSum::of(concat(power(Generator::creator(gs), n - 2), {Generator::creator(pointwise_mul(fg, gs))}),
                       CRational(4) * nn * CRational(static_cast<long>(n - 1)));
  return rhs;
}

/// Both commutator identities, each paired with a mutated right side that
/// must be rejected.
inline std::vector<PropertyResult> commutator_identities(const Config& cfg) {
  RandomSource rng(cfg.seed ^ 0x02);
  std::vector<std::pair<ExactFunction, ExactFunction>> cases;
  for (unsigned i = 0; i < cfg.identity_cases; ++i) cases.push_back(detail::random_exact_pair(rng, 3, Rational(1), 4));
  const std::size_t per_case = cfg.identity_max_n;
  auto number = detail::run_cases(cases.size() * per_case, cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto& [f, g] = cases[i / per_case];
    const unsigned n = static_cast<unsigned>(i % per_case) + 1;
    const auto lhs = commutator({Generator::number(f)}, power(Generator::creator(g), n), cfg.c);
    const bool holds = verify_operator_identity(lhs, number_commutator_rhs(f, g, n, CRational(2 * n)));
    // the mutated coefficient is only distinguishable when f g is not identically zero
    auto [fs, gs] = common_refinement(f, g);
    const bool mutant_detected = pointwise_mul(fs, gs).is_zero() ||
                                 !verify_operator_identity(lhs, number_commutator_rhs(f, g, n, CRational(2 * n + 1)));
    t.add(holds && mutant_detected, holds ? 0.0 : 1.0, "case " + std::to_string(i / per_case) + " n=" + std::to_string(n));
    return t;
  });
  auto annihilator = detail::run_cases(cases.size() * per_case, cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto& [f, g] = cases[i / per_case];
    const unsigned n = static_cast<unsigned>(i % per_case) + 1;
    const auto lhs = commutator({Generator::annihilator(f)}, power(Generator::creator(g), n), cfg.c);
    const auto rhs = annihilator_commutator_rhs(f, g, n, cfg.c);
    const bool holds = verify_operator_identity(lhs, rhs);
    // 2nc<f,g> -> (2n+1)c<f,g> must be caught unless <f,g> vanishes
    auto [fs, gs] = common_refinement(f, g);
    const CRational fg = moment(fs, gs, 1);
    const auto mutant = rhs + TermSum::of(power(Generator::creator(gs), n - 1), CRational(cfg.c) * fg);
    const bool mutant_detected = fg.is_zero() || !verify_operator_identity(lhs, mutant);
    t.add(holds && mutant_detected, holds ? 0.0 : 1.0, "case " + std::to_string(i / per_case) + " n=" + std::to_string(n));
    return t;
  });
  const std::string detail = std::to_string(cases.size()) + " random pairs, n<=" + std::to_string(cfg.identity_max_n);
  return {number.result("commutator_number_creator_power", detail),
          annihilator.result("commutator_annihilator_creator_power", detail)};
}

/// B_{f_k}..B_{f_1} B+_{g_h}..B+_{g_1} Phi = 0 whenever k > h.
inline PropertyResult annihilation_excess(const Config& cfg, unsigned max_size = 3) {
  RandomSource rng(cfg.seed ^ 0x03);
  std::vector<OperatorWord> words;
  std::vector<std::string> labels;
  for (unsigned k = 1; k <= max_size; ++k)
    for (unsigned h = 0; h < k; ++h)
      for (unsigned rep = 0; rep < cfg.lemma2_cases; ++rep) {
        OperatorWord w;
        for (unsigned i = 0; i < k; ++i) w.push_back(Generator::annihilator(detail::random_exact(rng, 3, Rational(1), 4)));
        for (unsigned i = 0; i < h; ++i) w.push_back(Generator::creator(detail::random_exact(rng, 3, Rational(1), 4)));
        words.push_back(std::move(w));
        labels.push_back("k=" + std::to_string(k) + " h=" + std::to_string(h));
      }
  auto tally = detail::run_cases(words.size(), cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto state = apply_to_vacuum(words[i], cfg.c);
    t.add(state.empty(), static_cast<double>(state.size()), labels[i]);
    return t;
  });
  return tally.result("annihilation_excess_vanishes",
                      "all shapes k>h with k<=" + std::to_string(max_size) + ", " + std::to_string(cfg.lemma2_cases) +
                          " random words each");
}

/// <B+^m_f Phi, B+^n_g Phi> = 0 for m != n.
inline PropertyResult order_orthogonality(const Config& cfg, unsigned max_order = 4) {
  RandomSource rng(cfg.seed ^ 0x04);
  struct Case {
    ExactFunction f, g;
    unsigned m, n;
  };
  std::vector<Case> cases;
  for (unsigned m = 0; m <= max_order; ++m)
    for (unsigned n = 0; n <= max_order; ++n) {
      if (m == n) continue;
      auto [f, g] = detail::random_exact_pair(rng, 3, Rational(1), 4);
      cases.push_back({f, g, m, n});
    }
  auto tally = detail::run_cases(cases.size(), cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto& cs = cases[i];
    const auto v = vacuum_expectation(concat(power(Generator::annihilator(cs.f), cs.m),
                                             power(Generator::creator(cs.g), cs.n)),
                                      cfg.c);
    t.add(v.is_zero(), std::abs(to_complex(v)), "m=" + std::to_string(cs.m) + " n=" + std::to_string(cs.n));
    return t;
  });
  return tally.result("mixed_order_orthogonality", "all m != n <= " + std::to_string(max_order));
}

/// Every rewrite order reaches the same canonical normal form.
inline PropertyResult confluence(const Config& cfg) {
  RandomSource rng(cfg.seed ^ 0x05);
  std::vector<OperatorWord> words;
  for (unsigned i = 0; i < cfg.confluence_words; ++i) {
    const unsigned len = static_cast<unsigned>(rng.between(2, static_cast<int>(cfg.confluence_max_len)));
    auto p = detail::random_cells(rng, static_cast<unsigned>(rng.between(1, 2)));
    OperatorWord w;
    for (unsigned j = 0; j < len; ++j) {
      auto arg = rng.exact_function(p, Rational(1), 3, true);
      switch (rng.below(3)) {
        case 0: w.push_back(Generator::creator(arg)); break;
        case 1: w.push_back(Generator::number(arg)); break;
        default: w.push_back(Generator::annihilator(arg)); break;
      }
    }
    words.push_back(std::move(w));
  }
  auto tally = detail::run_cases(words.size(), cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto reference = normal_order(words[i], cfg.c);
    bool same = normal_order_with_strategy(words[i], cfg.c, RewriteStrategy::Leftmost) == reference &&
                normal_order_with_strategy(words[i], cfg.c, RewriteStrategy::Rightmost) == reference;
    for (std::uint64_t s = 0; s < 3; ++s)
      same = same && normal_order_with_strategy(words[i], cfg.c, RewriteStrategy::Random, cfg.seed + 7 * i + s) == reference;
    t.add(same, same ? 0.0 : 1.0, "word " + std::to_string(i));
    return t;
  });
  return tally.result("rewrite_confluence", std::to_string(words.size()) + " random words of length <= " +
                                                std::to_string(cfg.confluence_max_len) + ", 5 strategies each");
}

/// I_n(g,f) = conj(I_n(f,g)), both from the recursion and from the oracle.
inline PropertyResult hermitian_symmetry(const Config& cfg, unsigned max_n = 3) {
  RandomSource rng(cfg.seed ^ 0x06);
  std::vector<std::pair<ExactFunction, ExactFunction>> cases;
  for (unsigned i = 0; i < cfg.identity_cases; ++i) cases.push_back(detail::random_exact_pair(rng, 3, Rational(1), 4));
  auto tally = detail::run_cases(cases.size(), cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto& [f, g] = cases[i];
    const auto fg = inner_table(f, g, 8, cfg.c).values;
    const auto gf = inner_table(g, f, 8, cfg.c).values;
    for (unsigned n = 0; n <= 8; ++n) t.add(gf[n] == conj(fg[n]), detail::exact_gap(gf[n], conj(fg[n])), "recursion n=" + std::to_string(n));
    for (unsigned n = 1; n <= max_n; ++n) {
      const auto a = oracle_nth_inner(f, g, n, cfg.c);
      const auto b = oracle_nth_inner(g, f, n, cfg.c);
      t.add(a == conj(b), detail::exact_gap(a, conj(b)), "oracle n=" + std::to_string(n));
    }
    return t;
  });
  return tally.result("hermitian_symmetry", std::to_string(cases.size()) + " pairs");
}

/// I_n(f,g) = sum_k C(n,k)^2 I_k(f1,g1) I_(n-k)(f2,g2) on two-part splits.
inline PropertyResult order_n_factorization(const Config& cfg) {
  RandomSource rng(cfg.seed ^ 0x07);
  struct Case {
    ExactFunction f, g;
    RegionSplit split;
  };
  std::vector<Case> cases;
  for (unsigned i = 0; i < cfg.factorization_cases; ++i) {
    auto p = detail::random_cells(rng, static_cast<unsigned>(rng.between(2, 4)));
    auto f = rng.exact_function(p, Rational(1), 4, true);
    auto g = rng.exact_function(p, Rational(1), 4, true);
    cases.push_back({f, g, detail::random_split(rng, *p, 2)});
  }
  auto tally = detail::run_cases(cases.size(), cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto& cs = cases[i];
    for (unsigned n = 0; n <= cfg.factorization_max_n; ++n) {
      const auto r = check_order_n_factorization(cs.f, cs.g, cs.split, n, cfg.c);
      t.add(r.discrepancy.is_zero(), std::abs(to_complex(r.discrepancy)),
            "case " + std::to_string(i) + " n=" + std::to_string(n));
    }
    return t;
  });
  return tally.result("order_n_factorization", std::to_string(cases.size()) + " random two-part splits, n<=" +
                                                   std::to_string(cfg.factorization_max_n));
}

/// <Psi(f),Psi(g)> factors over disjoint regions, closed form and series.
inline PropertyResult exponential_factorization(const Config& cfg, double tol = 1e-10) {
  RandomSource rng(cfg.seed ^ 0x08);
  struct Case {
    FloatFunction f, g;
    RegionSplit split;
  };
  std::vector<Case> cases;
  for (unsigned i = 0; i < cfg.factorization_cases; ++i) {
    auto p = detail::random_cells(rng, 4);
    auto f = rng.float_function(p, 0.4, true);
    auto g = rng.float_function(p, 0.4, true);
    cases.push_back({f, g, detail::random_split(rng, *p, static_cast<unsigned>(rng.between(2, 3)))});
  }
  const double c = to_double(cfg.c);
  auto tally = detail::run_cases(cases.size(), cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto& cs = cases[i];
    const auto r = check_exponential_factorization(cs.f, cs.g, cs.split, c, tol);
    t.add(r.passed, std::max(r.closed_rel_error, r.series_rel_error), "case " + std::to_string(i));
    return t;
  });
  return tally.result("exponential_factorization", std::to_string(cases.size()) +
                                                       " random splits of 4-cell functions, relative tolerance 1e-10");
}

/// Truncated series against the closed form.
inline PropertyResult series_vs_closed(const Config& cfg) {
  RandomSource rng(cfg.seed ^ 0x09);
  struct Case {
    FloatFunction f, g;
    double c;
  };
  const double cs_choices[] = {0.5, 1.0, 2.0};
  std::vector<Case> cases;
  for (unsigned i = 0; i < cfg.series_pairs; ++i) {
    auto p = detail::random_cells(rng, static_cast<unsigned>(rng.between(1, 4)));
    auto f = rng.float_function(p, 0.4, i % 4 != 0);
    auto g = rng.coin() ? rng.float_function(p, 0.4, i % 4 != 0) : rng.float_function(detail::random_cells(rng, 3), 0.4, true);
    cases.push_back({f, g, cs_choices[rng.below(3)]});
  }
  auto tally = detail::run_cases(cases.size(), cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto& cs = cases[i];
    const auto series = exp_inner_series(cs.f, cs.g, cs.c, cfg.series_tol, 2000).value;
    const auto closed = exp_inner_closed(cs.f, cs.g, cs.c);
    const double rel = std::abs(series - closed) / std::abs(closed);
    t.add(rel <= cfg.series_rel_tol, rel, "pair " + std::to_string(i));
    return t;
  });
  return tally.result("series_matches_closed_form", std::to_string(cases.size()) +
                                                        " pairs with sup norms <= 0.4, series tol 1e-10");
}

/// J_n / J_(n-1) = 4 conj(rho) sigma (c|I|/(2n) + (n-1)/n) for f = rho chi_I, g = sigma chi_I.
inline PropertyResult ratio_law(const Config& cfg) {
  RandomSource rng(cfg.seed ^ 0x0a);
  struct Case {
    CRational rho, sigma;
    Rational length, c;
  };
  std::vector<Case> cases;
  for (unsigned i = 0; i < cfg.ratio_cases; ++i) {
    Rational length(rng.between(1, 12), rng.between(1, 4));
    Rational c(rng.between(1, 6), rng.between(1, 3));
    cases.push_back({rng.complex_rational(Rational(1), 5, true), rng.complex_rational(Rational(1), 5, true), length, c});
  }
  cases.push_back({CRational(Rational(1, 4)), CRational(Rational(1, 4)), Rational(1), Rational(1)});
  auto tally = detail::run_cases(cases.size(), cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto& cs = cases[i];
    if (cs.rho.is_zero() || cs.sigma.is_zero()) {
      t.add(true, 0.0, "");
      return t;
    }
    auto p = std::make_shared<const Partition>(std::vector<Cell>{{interval_id(0, cs.length), cs.length, Span1D{0, cs.length}}});
    const ExactFunction f(p, {cs.rho});
    const ExactFunction g(p, {cs.sigma});
    const auto J = normalized_table(f, g, cfg.ratio_max_n, cs.c);
    const auto I = inner_table(f, g, cfg.ratio_max_n, cs.c).values;
    const CRational w = CRational(4) * conj(cs.rho) * cs.sigma;
    for (unsigned n = 1; n <= cfg.ratio_max_n; ++n) {
      const Rational factor = cs.c * cs.length / (2 * n) + Rational(n - 1, n);
      const CRational predicted = J[n - 1] * w * CRational(factor);
      const BigInt nf = factorial(n);
      const CRational from_I = I[n] * CRational(Rational(1) / Rational(nf * nf));
      t.add(J[n] == predicted && from_I == J[n], detail::exact_gap(J[n], predicted), "case " + std::to_string(i) + " n=" + std::to_string(n));
    }
    return t;
  });
  return tally.result("step_function_ratio_law", std::to_string(cases.size()) + " rational (rho, sigma, |I|, c), n<=" +
                                                     std::to_string(cfg.ratio_max_n));
}

/// |h| >= |g| cellwise implies I_n(h,h) >= I_n(g,g).
inline PropertyResult monotonicity(const Config& cfg) {
  RandomSource rng(cfg.seed ^ 0x0b);
  static const CRational phases[] = {CRational(1), CRational(0, 1), CRational(-1),
                                     CRational(Rational(3, 5), Rational(4, 5)), CRational(Rational(-5, 13), Rational(12, 13))};
  std::vector<std::pair<ExactFunction, ExactFunction>> cases;
  for (unsigned i = 0; i < cfg.monotonicity_pairs; ++i) {
    auto p = detail::random_cells(rng, static_cast<unsigned>(rng.between(1, 3)));
    auto g = rng.exact_function(p, Rational(1, 2), 4, true);
    std::vector<CRational> hv;
    for (const auto& v : g.values()) {
      CRational grow(Rational(1) + Rational(rng.between(0, 3), 4));
      CRational h = v * grow * phases[rng.below(5)];
      if (v.is_zero() && rng.coin()) h = rng.complex_rational(Rational(1, 2), 4, true);
      hv.push_back(h);
    }
    cases.emplace_back(g, ExactFunction(p, std::move(hv)));
  }
  auto tally = detail::run_cases(cases.size(), cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto& [g, h] = cases[i];
    const auto Ig = inner_table(g, g, cfg.monotonicity_max_n, cfg.c).values;
    const auto Ih = inner_table(h, h, cfg.monotonicity_max_n, cfg.c).values;
    for (unsigned n = 0; n <= cfg.monotonicity_max_n; ++n) {
      const bool ok = Ig[n].im == 0 && Ih[n].im == 0 && Ih[n].re >= Ig[n].re;
      t.add(ok, ok ? 0.0 : to_double(Ig[n].re - Ih[n].re), "pair " + std::to_string(i) + " n=" + std::to_string(n));
    }
    return t;
  });
  return tally.result("norm_monotonicity", std::to_string(cases.size()) + " pairs with |h|>=|g|, n<=" +
                                               std::to_string(cfg.monotonicity_max_n));
}

/// Hadamard powers and the entrywise exponential of PSD matrices stay PSD.
inline PropertyResult schur_powers(const Config& cfg, double tol = 1e-12) {
  RandomSource rng(cfg.seed ^ 0x0c);
  std::vector<CMatrix> mats;
  for (unsigned i = 0; i < cfg.schur_cases; ++i) mats.push_back(detail::random_psd(rng, cfg.schur_dim));
  auto tally = detail::run_cases(mats.size(), cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    double worst = 0.0;
    bool ok = true;
    auto check = [&](const CMatrix& m) {
      const auto s = hermitian_spectrum(m);
      const double rel = s.spectral_norm > 0 ? -s.min_eigenvalue / s.spectral_norm : 0.0;
      worst = std::max(worst, rel);
      ok = ok && s.min_eigenvalue >= -tol * s.spectral_norm;
    };
    for (unsigned n = 1; n <= cfg.schur_max_power; ++n) check(hadamard_power(mats[i], n));
    check(hadamard_exp(mats[i]));
    ok = ok && verify_schur_powers(mats[i], cfg.schur_max_power, tol);
    t.add(ok, worst, "matrix " + std::to_string(i));
    return t;
  });
  return tally.result("schur_powers", std::to_string(mats.size()) + " random PSD " + std::to_string(cfg.schur_dim) + "x" +
                                          std::to_string(cfg.schur_dim) + ", powers <= " +
                                          std::to_string(cfg.schur_max_power) + " and exp, tolerance 1e-12");
}

/// The log kernel and the Gram matrix of random admissible families are PSD.
inline PropertyResult kernel_positivity(const Config& cfg) {
  RandomSource rng(cfg.seed ^ 0x0d);
  std::vector<std::vector<FloatFunction>> families;
  for (unsigned i = 0; i < cfg.kernel_families; ++i) {
    std::vector<FloatFunction> fam;
    const unsigned size = static_cast<unsigned>(rng.between(2, 5));
    for (unsigned j = 0; j < size; ++j) fam.push_back(rng.float_function(detail::random_cells(rng, 3), 0.45, true));
    families.push_back(std::move(fam));
  }
  const double c = to_double(cfg.c);
  auto tally = detail::run_cases(families.size(), cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto r = gram_matrix(std::span<const FloatFunction>(families[i]), c, 1e-10);
    const auto ks = hermitian_spectrum(r.kernel_matrix);
    const bool kernel_psd = ks.min_eigenvalue >= -1e-12 * ks.spectral_norm;
    const double worst = std::max(ks.spectral_norm > 0 ? -ks.min_eigenvalue / ks.spectral_norm : 0.0,
                                  r.spectral_norm > 0 ? -r.min_eigenvalue / r.spectral_norm : 0.0);
    t.add(kernel_psd && r.psd, std::max(0.0, worst), "family " + std::to_string(i));
    return t;
  });
  return tally.result("gram_kernel_positivity", std::to_string(families.size()) + " random families of 2-5 functions");
}

/// The fixed three-function family is independent; a duplicate is not.
inline PropertyResult gram_independence(const Config& cfg) {
  detail::Tally t;
  auto level = [](double v) { return indicator<Complex>(Rational(0), Rational(1), Complex(v, 0.0)); };
  const std::vector<FloatFunction> family{level(0.1), level(0.2), level(0.3)};
  const double c = to_double(cfg.c);
  const auto r = gram_matrix(std::span<const FloatFunction>(family), c, 1e-10, cfg.jobs);
  t.add(r.min_eigenvalue > 0 && r.independent, r.min_eigenvalue, "{0.1, 0.2, 0.3} should be independent");
  const std::vector<FloatFunction> dup{level(0.1), level(0.2), level(0.3), level(0.2)};
  const auto d = gram_matrix(std::span<const FloatFunction>(dup), c, 1e-10, cfg.jobs);
  t.add(d.min_eigenvalue < 1e-10 * d.spectral_norm && !d.independent, d.min_eigenvalue / d.spectral_norm,
        "duplicate should be dependent");
  return t.result("gram_independence", "{0.1, 0.2, 0.3} on [0,1) and the same family with 0.2 repeated");
}

/// n! [t^n] of the closed form equals I_n/n!.
inline PropertyResult derivative_check(const Config& cfg) {
  RandomSource rng(cfg.seed ^ 0x0e);
  std::vector<std::pair<ExactFunction, ExactFunction>> cases;
  for (unsigned i = 0; i < cfg.derivative_cases; ++i) {
    auto p = detail::random_cells(rng, 1);
    const bool imag = i % 2 == 1;
    cases.emplace_back(rng.exact_function(p, Rational(1, 2), 6, imag), rng.exact_function(p, Rational(1, 2), 6, imag));
  }
  auto tally = detail::run_cases(cases.size(), cfg.jobs, [&](std::size_t i) {
    detail::Tally t;
    const auto& [f, g] = cases[i];
    for (unsigned n = 1; n <= cfg.derivative_max_n; ++n) {
      const double rel = derivative_coefficient_check(f, g, n, cfg.c);
      t.add(rel <= cfg.derivative_tol, rel, "case " + std::to_string(i) + " n=" + std::to_string(n));
    }
    return t;
  });
  return tally.result("derivative_coefficients", std::to_string(cases.size()) + " single-cell rational pairs, n<=" +
                                                     std::to_string(cfg.derivative_max_n));
}

/// f = rho chi_[0,1): convergence below 1/2, the harmonic lower bound at 1/2.
inline PropertyResult existence_boundary(const Config& cfg) {
  detail::Tally t;
  const double c = 1.0;
  for (const auto& rho : {Rational(49, 100), Rational(499, 1000)}) {
    auto f = indicator<CRational>(Rational(0), Rational(1), CRational(rho));
    const auto v = exists_exponential(f);
    bool converged = false;
    double tail = std::numeric_limits<double>::infinity();
    try {
      const auto s = exp_inner_series(f, f, c, 1e-10, cfg.boundary_n_max);
      converged = s.diagnostics.converged;
      tail = s.diagnostics.tail_bound;
    } catch (const Error&) {
    }
    t.add(v.exists && converged, tail, "rho=" + to_string(rho));
  }
  auto half = indicator<CRational>(Rational(0), Rational(1), CRational(Rational(1, 2)));
  const auto v = exists_exponential(half);
  t.add(!v.exists && v.exact_margin && *v.exact_margin == 0, v.margin, "rho=1/2 flagged");
  const auto rows = series_trajectory(half, half, c, 50);
  double harmonic = 0.0;
  double worst = std::numeric_limits<double>::infinity();
  bool above = true;
  for (unsigned n = 1; n <= 50; ++n) {
    harmonic += 0.25 / n;
    const double gap = rows[n].partial_sum.real() - harmonic;
    worst = std::min(worst, gap);
    above = above && gap > 0;
  }
  t.add(above, worst < 0 ? -worst : 0.0, "rho=1/2 partial sums above (1/4) H_N");
  bool raised = false;
  try {
    (void)exp_inner_series(half, half, c);
  } catch (const Error& e) {
    raised = e.kind() == ErrorKind::DomainViolation;
  }
  t.add(raised, 0.0, "rho=1/2 series refused");
  return t.result("existence_boundary", "rho in {0.49, 0.499} converge, rho = 1/2 diverges (N = 50)");
}

inline std::vector<PropertyResult> run_all(const Config& cfg) {
  std::vector<PropertyResult> out;
  out.push_back(oracle_equivalence(cfg));
  for (auto& r : commutator_identities(cfg)) out.push_back(std::move(r));
  out.push_back(annihilation_excess(cfg));
  out.push_back(order_orthogonality(cfg));
  out.push_back(confluence(cfg));
  out.push_back(hermitian_symmetry(cfg));
  out.push_back(order_n_factorization(cfg));
  out.push_back(exponential_factorization(cfg));
  out.push_back(series_vs_closed(cfg));
  out.push_back(ratio_law(cfg));
  out.push_back(monotonicity(cfg));
  out.push_back(schur_powers(cfg));
  out.push_back(kernel_positivity(cfg));
  out.push_back(gram_independence(cfg));
  out.push_back(derivative_check(cfg));
  out.push_back(existence_boundary(cfg));
  return out;
}

inline std::vector<PropertyResult> run_factorization(const Config& cfg) {
  return {order_n_factorization(cfg), exponential_factorization(cfg)};
}

}  // namespace qfock::suite

#endif  // QFOCK_SUITE_HPP
