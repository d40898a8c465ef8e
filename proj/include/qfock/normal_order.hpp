#ifndef QFOCK_NORMAL_ORDER_HPP
#define QFOCK_NORMAL_ORDER_HPP

// Symbolic oracle for the renormalized square of white noise. Words in the
// generators B+_f, N_a, B_h are rewritten to normal order (creators, then
// number operators, then annihilators) using only
//
//   B_h B+_f = B+_f B_h + 2c<h,f> + 4 N_{conj(h) f}
//   N_a B+_f = B+_f N_a + 2 B+_{a f}
//   B_h N_b  = N_b B_h  + 2 B_{conj(b) h}        (adjoint of the line above)
//
// with creators, number operators and annihilators each commuting among
// themselves. All coefficients are exact complex rationals; B_h is
// antilinear in h, N_a and B+_f are linear.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "qfock/error.hpp"
#include "qfock/rational.hpp"
#include "qfock/stepfn.hpp"

namespace qfock {

enum class GenKind : std::uint8_t { Creator = 0, Number = 1, Annihilator = 2 };

struct Generator {
  GenKind kind;
  ExactFunction arg;

  static Generator creator(ExactFunction f) { return {GenKind::Creator, std::move(f)}; }
  static Generator number(ExactFunction a) { return {GenKind::Number, std::move(a)}; }
  static Generator annihilator(ExactFunction h) { return {GenKind::Annihilator, std::move(h)}; }
};

/// Factors listed left to right; the rightmost acts on a state first.
using OperatorWord = std::vector<Generator>;

inline OperatorWord power(const Generator& g, unsigned n) { return OperatorWord(n, g); }

inline OperatorWord concat(OperatorWord a, const OperatorWord& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline bool generator_less(const Generator& a, const Generator& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  return canonical_less(a.arg, b.arg);
}

inline bool generator_equal(const Generator& a, const Generator& b) { return a.kind == b.kind && a.arg == b.arg; }

inline bool is_normal_ordered(const OperatorWord& w) {
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i].kind < w[i - 1].kind) return false;
  return true;
}

struct Term {
  CRational coeff;
  OperatorWord word;
};

/// Canonical sum of normal-ordered terms: families sorted, like terms merged,
/// zero coefficients dropped.
class TermSum {
 public:
  TermSum() = default;

  static TermSum scalar(CRational value) {
    TermSum s;
    s.terms_.push_back({std::move(value), {}});
    s.canonicalize();
    return s;
  }

  static TermSum of(OperatorWord word, CRational coeff = CRational(1)) {
    if (!is_normal_ordered(word)) throw Error(ErrorKind::InvalidArgument, "TermSum::of expects a normal-ordered word");
    TermSum s;
    s.terms_.push_back({std::move(coeff), std::move(word)});
    s.canonicalize();
    return s;
  }

  static TermSum from_terms(std::vector<Term> terms) {
    TermSum s;
    s.terms_ = std::move(terms);
    s.canonicalize();
    return s;
  }

  std::span<const Term> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Coefficient of the empty word.
  CRational scalar_part() const {
    for (const auto& t : terms_)
      if (t.word.empty()) return t.coeff;
    return CRational(0);
  }

  TermSum& operator+=(const TermSum& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    canonicalize();
    return *this;
  }
  TermSum& operator-=(const TermSum& o) { return *this += o * CRational(-1); }

  friend TermSum operator+(TermSum a, const TermSum& b) { return a += b; }
  friend TermSum operator-(TermSum a, const TermSum& b) { return a -= b; }
  friend TermSum operator*(TermSum a, const CRational& k) {
    for (auto& t : a.terms_) t.coeff *= k;
    a.canonicalize();
    return a;
  }
  friend TermSum operator*(const CRational& k, TermSum a) { return std::move(a) * k; }

  friend bool operator==(const TermSum& a, const TermSum& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i) {
      const auto& x = a.terms_[i];
      const auto& y = b.terms_[i];
      if (!(x.coeff == y.coeff) || x.word.size() != y.word.size()) return false;
      for (std::size_t j = 0; j < x.word.size(); ++j)
        if (!generator_equal(x.word[j], y.word[j])) return false;
    }
    return true;
  }

 private:
  static bool word_less(const OperatorWord& a, const OperatorWord& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), generator_less);
  }
  static bool word_equal(const OperatorWord& a, const OperatorWord& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), generator_equal);
  }

  void canonicalize() {
    std::vector<Term> kept;
    for (auto& t : terms_) {
      if (t.coeff.is_zero()) continue;
      if (std::any_of(t.word.begin(), t.word.end(), [](const Generator& g) { return g.arg.is_zero(); })) continue;
      if (!is_normal_ordered(t.word)) throw Error(ErrorKind::InvalidArgument, "TermSum holds only normal-ordered words");
      std::stable_sort(t.word.begin(), t.word.end(), generator_less);
      kept.push_back(std::move(t));
    }
    std::stable_sort(kept.begin(), kept.end(), [](const Term& a, const Term& b) { return word_less(a.word, b.word); });
    terms_.clear();
    for (auto& t : kept) {
      if (!terms_.empty() && word_equal(terms_.back().word, t.word))
        terms_.back().coeff += t.coeff;
      else
        terms_.push_back(std::move(t));
    }
    std::erase_if(terms_, [](const Term& t) { return t.coeff.is_zero(); });
  }

  std::vector<Term> terms_;
};

enum class RewriteStrategy { Leftmost, Rightmost, Random };

struct NormalOrderOptions {
  std::size_t max_terms = 1'000'000;
};

namespace detail {

/// Interned test functions on one shared partition, with cached products.
class FunctionTable {
 public:
  explicit FunctionTable(PartitionPtr partition) : partition_(std::move(partition)) {}

  /// -1 denotes the zero function.
  int intern(std::vector<CRational> values) {
    if (std::all_of(values.begin(), values.end(), [](const CRational& v) { return v.is_zero(); })) return -1;
    auto [it, inserted] = index_.try_emplace(values, static_cast<int>(values_.size()));
    if (inserted) values_.push_back(std::move(values));
    return it->second;
  }

  int intern(const ExactFunction& f) {
    if (f.partition().empty()) return -1;
    return intern(std::vector<CRational>(f.values().begin(), f.values().end()));
  }

  /// a * b pointwise
  int product(int a, int b) { return combine(a, b, false); }
  /// conj(a) * b pointwise
  int conj_product(int a, int b) { return combine(a, b, true); }

  /// integral of conj(a) b
  const CRational& inner(int a, int b) {
    auto key = std::make_pair(a, b);
    auto it = inner_cache_.find(key);
    if (it != inner_cache_.end()) return it->second;
    CRational total;
    const auto& va = values_[a];
    const auto& vb = values_[b];
    for (std::size_t i = 0; i < va.size(); ++i) {
      if (va[i].is_zero() || vb[i].is_zero()) continue;
      total += CRational(partition_->cells()[i].measure) * conj(va[i]) * vb[i];
    }
    return inner_cache_.emplace(key, std::move(total)).first->second;
  }

  ExactFunction function(int id) const { return ExactFunction(partition_, values_[id]); }

 private:
  int combine(int a, int b, bool conj_first) {
    auto key = std::make_tuple(a, b, conj_first);
    if (auto it = product_cache_.find(key); it != product_cache_.end()) return it->second;
    std::vector<CRational> v(values_[a].size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = (conj_first ? conj(values_[a][i]) : values_[a][i]) * values_[b][i];
    const int id = intern(std::move(v));
    product_cache_.emplace(key, id);
    return id;
  }

  PartitionPtr partition_;
  std::vector<std::vector<CRational>> values_;
  std::map<std::vector<CRational>, int> index_;
  std::map<std::tuple<int, int, bool>, int> product_cache_;
  std::map<std::pair<int, int>, CRational> inner_cache_;
};

/// Normal-ordered word with interned arguments, each family sorted by id.
struct NormalWord {
  std::vector<int> cre;
  std::vector<int> num;
  std::vector<int> ann;

  friend auto operator<=>(const NormalWord&, const NormalWord&) = default;
  friend bool operator==(const NormalWord&, const NormalWord&) = default;
};

inline void insert_sorted(std::vector<int>& v, int id) { v.insert(std::upper_bound(v.begin(), v.end(), id), id); }

using TermMap = std::map<NormalWord, CRational>;

inline void accumulate(TermMap& out, NormalWord w, const CRational& coeff) {
  if (coeff.is_zero()) return;
  auto [it, inserted] = out.try_emplace(std::move(w), coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second.is_zero()) out.erase(it);
  }
}

/// Multiplies a normal word on the left by one generator and writes the
/// normal-ordered result into `out`. The generator always rewrites against
/// its right neighbour, i.e. the leftmost reducible pair of the product.
class LeftMultiplier {
 public:
  LeftMultiplier(FunctionTable& table, Rational c) : table_(table), c_(std::move(c)) {}

  void apply(GenKind kind, int arg, const NormalWord& w, const CRational& coeff, TermMap& out) {
    if (arg < 0) return;
    switch (kind) {
      case GenKind::Creator: {
        NormalWord r = w;
        insert_sorted(r.cre, arg);
        accumulate(out, std::move(r), coeff);
        break;
      }
      case GenKind::Number:
        number(arg, w, coeff, out);
        break;
      case GenKind::Annihilator:
        annihilator(arg, w, coeff, out);
        break;
    }
  }

 private:
  // N_a C R = C N_a R + sum_i 2 C[c_i -> B+_{a f_i}] R
  void number(int a, const NormalWord& w, const CRational& coeff, TermMap& out) {
    for (std::size_t i = 0; i < w.cre.size(); ++i) {
      const int af = table_.product(a, w.cre[i]);
      if (af < 0) continue;
      NormalWord r = w;
      r.cre.erase(r.cre.begin() + static_cast<std::ptrdiff_t>(i));
      insert_sorted(r.cre, af);
      accumulate(out, std::move(r), coeff * CRational(2));
    }
    NormalWord r = w;
    insert_sorted(r.num, a);
    accumulate(out, std::move(r), coeff);
  }

  void annihilator(int h, const NormalWord& w, const CRational& coeff, TermMap& out) {
    // Through the creators: B_h c_1..c_k = c_1..c_k B_h + sum_i c_1..c_(i-1) (2c<h,f_i> + 4 N_{h f_i}) c_(i+1)..c_k
    for (std::size_t i = 0; i < w.cre.size(); ++i) {
      const int fi = w.cre[i];
      const CRational& hf = table_.inner(h, fi);
      if (!hf.is_zero()) {
        NormalWord r = w;
        r.cre.erase(r.cre.begin() + static_cast<std::ptrdiff_t>(i));
        accumulate(out, std::move(r), coeff * CRational(2) * CRational(c_) * hf);
      }
      const int b = table_.conj_product(h, fi);
      if (b < 0) continue;
      NormalWord tail{{w.cre.begin() + static_cast<std::ptrdiff_t>(i) + 1, w.cre.end()}, w.num, w.ann};
      TermMap partial;
      number(b, tail, coeff * CRational(4), partial);
      for (auto& [pw, pc] : partial) {
        NormalWord r = pw;
        for (std::size_t j = 0; j < i; ++j) insert_sorted(r.cre, w.cre[j]);
        accumulate(out, std::move(r), pc);
      }
    }
    // Through the number operators: B_h N_b = N_b B_h + 2 B_{conj(b) h}
    NormalWord core{{}, w.num, w.ann};
    TermMap moved;
    through_numbers(h, core, coeff, moved);
    for (auto& [pw, pc] : moved) {
      NormalWord r = pw;
      r.cre = w.cre;
      accumulate(out, std::move(r), pc);
    }
  }

  // B_h N_1..N_m A with no creators present.
  void through_numbers(int h, const NormalWord& w, const CRational& coeff, TermMap& out) {
    for (std::size_t j = 0; j < w.num.size(); ++j) {
      const int hb = table_.conj_product(w.num[j], h);
      if (hb < 0) continue;
      NormalWord tail{{}, {w.num.begin() + static_cast<std::ptrdiff_t>(j) + 1, w.num.end()}, w.ann};
      TermMap partial;
      through_numbers(hb, tail, coeff * CRational(2), partial);
      for (auto& [pw, pc] : partial) {
        NormalWord r = pw;
        for (std::size_t i = 0; i < j; ++i) insert_sorted(r.num, w.num[i]);
        accumulate(out, std::move(r), pc);
      }
    }
    NormalWord r = w;
    insert_sorted(r.ann, h);
    accumulate(out, std::move(r), coeff);
  }

  FunctionTable& table_;
  Rational c_;
};

struct Prepared {
  std::shared_ptr<FunctionTable> table;
  std::vector<std::pair<GenKind, int>> word;
};

inline Prepared prepare(const OperatorWord& w) {
  std::vector<ExactFunction> args;
  args.reserve(w.size());
  for (const auto& g : w) args.push_back(g.arg);
  auto shared = common_refinement(std::span<const ExactFunction>(args));
  PartitionPtr partition = shared.empty() ? std::make_shared<Partition>() : shared.front().partition_ptr();
  for (const auto& f : shared)
    if (!f.partition().empty()) partition = f.partition_ptr();
  Prepared p{std::make_shared<FunctionTable>(partition), {}};
  for (std::size_t i = 0; i < w.size(); ++i) {
    const int id = shared[i].partition().empty() ? -1 : p.table->intern(transfer(shared[i], partition));
    p.word.emplace_back(w[i].kind, id);
  }
  return p;
}

inline void require_positive(const Rational& c) {
  if (c <= 0) throw Error(ErrorKind::InvalidArgument, "the constant c must be positive");
}

inline TermSum to_term_sum(const TermMap& m, const FunctionTable& table) {
  std::vector<Term> terms;
  for (const auto& [w, coeff] : m) {
    OperatorWord word;
    for (int id : w.cre) word.push_back(Generator::creator(table.function(id)));
    for (int id : w.num) word.push_back(Generator::number(table.function(id)));
    for (int id : w.ann) word.push_back(Generator::annihilator(table.function(id)));
    terms.push_back({coeff, std::move(word)});
  }
  return TermSum::from_terms(std::move(terms));
}

/// Right-to-left left multiplication; when `vacuum` is set, every term that
/// ends in a number operator or annihilator is dropped since it kills Phi.
inline TermMap multiply_out(const Prepared& p, const Rational& c, bool vacuum, const NormalOrderOptions& opts) {
  LeftMultiplier mult(*p.table, c);
  TermMap state;
  state.emplace(NormalWord{}, CRational(1));
  for (auto it = p.word.rbegin(); it != p.word.rend(); ++it) {
    if (it->second < 0) return {};
    TermMap next;
    for (const auto& [w, coeff] : state) mult.apply(it->first, it->second, w, coeff, next);
    if (vacuum) std::erase_if(next, [](const auto& kv) { return !kv.first.num.empty() || !kv.first.ann.empty(); });
    if (next.size() > opts.max_terms)
      throw Error(ErrorKind::OracleBudgetExceeded,
                  "intermediate sum has " + std::to_string(next.size()) + " terms (cap " + std::to_string(opts.max_terms) + ")");
    state = std::move(next);
  }
  return state;
}

}  // namespace detail

/// Normal form of a word, rewriting the leftmost reducible pair first.
inline TermSum normal_order(const OperatorWord& w, const Rational& c, const NormalOrderOptions& opts = {}) {
  detail::require_positive(c);
  auto p = detail::prepare(w);
  return detail::to_term_sum(detail::multiply_out(p, c, false, opts), *p.table);
}

/// Normal form computed by literal pair rewriting on whole words, choosing
/// the reducible adjacent pair by `strategy`. Exponential in the word
/// length; intended for confluence checks on short words.
inline TermSum normal_order_with_strategy(const OperatorWord& w, const Rational& c, RewriteStrategy strategy,
                                          std::uint64_t seed = 0, const NormalOrderOptions& opts = {}) {
  detail::require_positive(c);
  auto p = detail::prepare(w);
  auto& table = *p.table;
  using Raw = std::vector<std::pair<GenKind, int>>;
  std::mt19937_64 rng(seed);
  detail::TermMap done;
  std::vector<std::pair<Raw, CRational>> stack;
  if (std::none_of(p.word.begin(), p.word.end(), [](const auto& x) { return x.second < 0; }))
    stack.emplace_back(p.word, CRational(1));
  std::size_t steps = 0;
  while (!stack.empty()) {
    auto [word, coeff] = std::move(stack.back());
    stack.pop_back();
    if (++steps > opts.max_terms) throw Error(ErrorKind::OracleBudgetExceeded, "rewrite step budget exhausted");
    std::vector<std::size_t> reducible;
    for (std::size_t i = 0; i + 1 < word.size(); ++i)
      if (word[i].first > word[i + 1].first) reducible.push_back(i);
    if (reducible.empty()) {
      detail::NormalWord nw;
      for (const auto& [kind, id] : word) {
        auto& fam = kind == GenKind::Creator ? nw.cre : kind == GenKind::Number ? nw.num : nw.ann;
        detail::insert_sorted(fam, id);
      }
      detail::accumulate(done, std::move(nw), coeff);
      continue;
    }
    std::size_t i = reducible.front();
    if (strategy == RewriteStrategy::Rightmost) i = reducible.back();
    if (strategy == RewriteStrategy::Random) i = reducible[rng() % reducible.size()];
    const auto left = word[i];
    const auto right = word[i + 1];
    auto splice = [&](std::vector<std::pair<GenKind, int>> mid) {
      Raw r(word.begin(), word.begin() + static_cast<std::ptrdiff_t>(i));
      r.insert(r.end(), mid.begin(), mid.end());
      r.insert(r.end(), word.begin() + static_cast<std::ptrdiff_t>(i) + 2, word.end());
      return r;
    };
    stack.emplace_back(splice({right, left}), coeff);
    if (left.first == GenKind::Annihilator && right.first == GenKind::Creator) {
      const CRational& hf = table.inner(left.second, right.second);
      if (!hf.is_zero()) stack.emplace_back(splice({}), coeff * CRational(2) * CRational(c) * hf);
      const int b = table.conj_product(left.second, right.second);
      if (b >= 0) stack.emplace_back(splice({{GenKind::Number, b}}), coeff * CRational(4));
    } else if (left.first == GenKind::Number && right.first == GenKind::Creator) {
      const int af = table.product(left.second, right.second);
      if (af >= 0) stack.emplace_back(splice({{GenKind::Creator, af}}), coeff * CRational(2));
    } else {  // B_h N_b
      const int bh = table.conj_product(right.second, left.second);
      if (bh >= 0) stack.emplace_back(splice({{GenKind::Annihilator, bh}}), coeff * CRational(2));
    }
  }
  return detail::to_term_sum(done, table);
}

/// The creator-only expansion of w Phi.
inline TermSum apply_to_vacuum(const OperatorWord& w, const Rational& c, const NormalOrderOptions& opts = {}) {
  detail::require_positive(c);
  auto p = detail::prepare(w);
  return detail::to_term_sum(detail::multiply_out(p, c, true, opts), *p.table);
}

/// <Phi, w Phi>.
inline CRational vacuum_expectation(const OperatorWord& w, const Rational& c, const NormalOrderOptions& opts = {}) {
  return apply_to_vacuum(w, c, opts).scalar_part();
}

struct OracleOptions {
  unsigned max_order = 6;
  std::size_t max_terms = 1'000'000;
};

/// <B+^n_f Phi, B+^n_g Phi> = <Phi, B_f^n B+^n_g Phi>, from the commutation
/// relations alone.
inline CRational oracle_nth_inner(const ExactFunction& f, const ExactFunction& g, unsigned n, const Rational& c,
                                  const OracleOptions& opts = {}) {
  if (n > opts.max_order)
    throw Error(ErrorKind::OracleBudgetExceeded,
                "order " + std::to_string(n) + " exceeds the oracle cap " + std::to_string(opts.max_order));
  auto word = concat(power(Generator::annihilator(f), n), power(Generator::creator(g), n));
  return vacuum_expectation(word, c, {opts.max_terms});
}

/// NO(ab) - NO(ba)
inline TermSum commutator(const OperatorWord& a, const OperatorWord& b, const Rational& c) {
  return normal_order(concat(a, b), c) - normal_order(concat(b, a), c);
}

/// Exact identity of two normal-ordered sums. Arguments are first brought
/// to one common refinement so equal functions compare equal regardless of
/// how their cells were cut.
inline bool verify_operator_identity(const TermSum& lhs, const TermSum& rhs) {
  std::vector<ExactFunction> args;
  for (const auto* side : {&lhs, &rhs})
    for (const auto& t : side->terms())
      for (const auto& g : t.word) args.push_back(g.arg);
  if (args.empty()) return lhs == rhs;
  auto shared = common_refinement(std::span<const ExactFunction>(args));
  std::size_t k = 0;
  auto rebuild = [&](const TermSum& s) {
    std::vector<Term> terms;
    for (const auto& t : s.terms()) {
      Term r{t.coeff, {}};
      for (const auto& g : t.word) r.word.push_back({g.kind, shared[k++]});
      terms.push_back(std::move(r));
    }
    return TermSum::from_terms(std::move(terms));
  };
  auto l = rebuild(lhs);
  auto r = rebuild(rhs);
  return l == r;
}

/// Floats and float-valued functions have no place in the oracle.
template <Scalar S>
ExactFunction require_rational(const StepFunction<S>& f) {
  if constexpr (is_exact_v<S>)
    return f;
  else
    throw Error(ErrorKind::NonRationalInput, "the normal-ordering oracle needs exact rational cell values");
}

}  // namespace qfock

#endif  // QFOCK_NORMAL_ORDER_HPP
