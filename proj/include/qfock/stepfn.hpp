#ifndef QFOCK_STEPFN_HPP
#define QFOCK_STEPFN_HPP

// Complex step functions on finitely many disjoint measured cells.
//
// A StepFunction is a value vector aligned with a shared, immutable
// Partition. Two functions can be combined pointwise only when they sit on
// equal partitions; common_refinement() produces such a pair. Cells carrying
// a half-open interval [a,b) are "geometric" and can be intersected; cells
// without one are "abstract" and must match by id and measure.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfock/error.hpp"
#include "qfock/rational.hpp"

namespace qfock {

struct Span1D {
  Rational a;
  Rational b;
  friend bool operator==(const Span1D&, const Span1D&) = default;
};

struct Cell {
  std::string id;
  Rational measure;
  std::optional<Span1D> span;  // set for cells built from intervals

  friend bool operator==(const Cell&, const Cell&) = default;
};

inline std::string interval_id(const Rational& a, const Rational& b) {
  return "[" + to_string(a) + "," + to_string(b) + ")";
}

class Partition {
 public:
  Partition() = default;

  /// Geometric cells are ordered by left endpoint, abstract ones by id.
  explicit Partition(std::vector<Cell> cells) : cells_(std::move(cells)) {
    if (cells_.empty()) return;
    geometric_ = std::all_of(cells_.begin(), cells_.end(), [](const Cell& c) { return c.span.has_value(); });
    const bool any_geometric =
        std::any_of(cells_.begin(), cells_.end(), [](const Cell& c) { return c.span.has_value(); });
    if (any_geometric && !geometric_)
      throw Error(ErrorKind::InvalidArgument, "partition mixes interval cells with abstract cells");
    for (const auto& c : cells_)
      if (c.measure <= 0) throw Error(ErrorKind::InvalidArgument, "cell '" + c.id + "' has nonpositive measure");
    if (geometric_) {
      std::sort(cells_.begin(), cells_.end(), [](const Cell& x, const Cell& y) { return x.span->a < y.span->a; });
      for (std::size_t i = 1; i < cells_.size(); ++i)
        if (cells_[i].span->a < cells_[i - 1].span->b)
          throw Error(ErrorKind::OverlappingIntervals,
                      interval_id(cells_[i - 1].span->a, cells_[i - 1].span->b) + " overlaps " +
                          interval_id(cells_[i].span->a, cells_[i].span->b));
    } else {
      std::sort(cells_.begin(), cells_.end(), [](const Cell& x, const Cell& y) { return x.id < y.id; });
    }
    for (std::size_t i = 1; i < cells_.size(); ++i)
      if (cells_[i].id == cells_[i - 1].id) throw Error(ErrorKind::InvalidArgument, "duplicate cell id '" + cells_[i].id + "'");
  }

  std::span<const Cell> cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  bool geometric() const { return geometric_; }

  std::optional<std::size_t> index_of(const std::string& id) const {
    for (std::size_t i = 0; i < cells_.size(); ++i)
      if (cells_[i].id == id) return i;
    return std::nullopt;
  }

  Rational total_measure() const {
    Rational t = 0;
    for (const auto& c : cells_) t += c.measure;
    return t;
  }

  friend bool operator==(const Partition& x, const Partition& y) { return x.cells_ == y.cells_; }

 private:
  std::vector<Cell> cells_;
  bool geometric_ = false;
};

using PartitionPtr = std::shared_ptr<const Partition>;

template <Scalar S>
class StepFunction {
 public:
  using scalar_type = S;

  StepFunction() : partition_(std::make_shared<Partition>()) {}

  StepFunction(PartitionPtr partition, std::vector<S> values)
      : partition_(std::move(partition)), values_(std::move(values)) {
    if (!partition_) partition_ = std::make_shared<Partition>();
    if (values_.size() != partition_->size())
      throw Error(ErrorKind::InvalidArgument, "value count does not match the partition");
  }

  const Partition& partition() const { return *partition_; }
  const PartitionPtr& partition_ptr() const { return partition_; }
  std::span<const S> values() const { return values_; }
  const S& value(std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  const Rational& measure(std::size_t i) const { return partition_->cells()[i].measure; }

  bool is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](const S& v) { return scalar_traits<S>::is_zero(v); });
  }

  bool shares_partition_with(const StepFunction& o) const {
    return partition_ == o.partition_ || *partition_ == *o.partition_;
  }

  /// Nonzero (cell, value) pairs in partition order; the canonical content.
  std::vector<std::pair<const Cell*, const S*>> support() const {
    std::vector<std::pair<const Cell*, const S*>> out;
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!scalar_traits<S>::is_zero(values_[i])) out.emplace_back(&partition_->cells()[i], &values_[i]);
    return out;
  }

  friend bool operator==(const StepFunction& f, const StepFunction& g) {
    auto sf = f.support();
    auto sg = g.support();
    if (sf.size() != sg.size()) return false;
    for (std::size_t i = 0; i < sf.size(); ++i)
      if (sf[i].first->id != sg[i].first->id || sf[i].first->measure != sg[i].first->measure ||
          !(*sf[i].second == *sg[i].second))
        return false;
    return true;
  }

 private:
  PartitionPtr partition_;
  std::vector<S> values_;
};

using ExactFunction = StepFunction<CRational>;
using FloatFunction = StepFunction<Complex>;

/// Lexicographic order over the sorted nonzero (cell-id, value) pairs.
template <Scalar S>
bool canonical_less(const StepFunction<S>& f, const StepFunction<S>& g) {
  auto sf = f.support();
  auto sg = g.support();
  const std::size_t n = std::min(sf.size(), sg.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (sf[i].first->id != sg[i].first->id) return sf[i].first->id < sg[i].first->id;
    const auto& a = *sf[i].second;
    const auto& b = *sg[i].second;
    if constexpr (is_exact_v<S>) {
      if (a != b) return a < b;
    } else {
      if (a.real() != b.real()) return a.real() < b.real();
      if (a.imag() != b.imag()) return a.imag() < b.imag();
    }
  }
  return sf.size() < sg.size();
}

inline FloatFunction to_float(const ExactFunction& f) {
  std::vector<Complex> v;
  v.reserve(f.size());
  for (const auto& x : f.values()) v.push_back(to_complex(x));
  return FloatFunction(f.partition_ptr(), std::move(v));
}
inline const FloatFunction& to_float(const FloatFunction& f) { return f; }

// ---------------------------------------------------------------------------
// Construction

template <Scalar S>
struct IntervalPiece {
  Rational a;
  Rational b;
  S value;
};

template <Scalar S>
struct IntervalSpec {
  std::vector<IntervalPiece<S>> intervals;
};

template <Scalar S>
StepFunction<S> from_intervals(const IntervalSpec<S>& spec) {
  auto pieces = spec.intervals;
  for (const auto& p : pieces)
    if (!(p.a < p.b)) throw Error(ErrorKind::EmptyInterval, interval_id(p.a, p.b) + " is empty");
  std::sort(pieces.begin(), pieces.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  for (std::size_t i = 1; i < pieces.size(); ++i)
    if (pieces[i].a < pieces[i - 1].b)
      throw Error(ErrorKind::OverlappingIntervals,
                  interval_id(pieces[i - 1].a, pieces[i - 1].b) + " overlaps " + interval_id(pieces[i].a, pieces[i].b));
  std::vector<Cell> cells;
  std::vector<S> values;
  for (const auto& p : pieces) {
    if (scalar_traits<S>::is_zero(p.value)) continue;
    cells.push_back({interval_id(p.a, p.b), p.b - p.a, Span1D{p.a, p.b}});
    values.push_back(p.value);
  }
  return StepFunction<S>(std::make_shared<Partition>(std::move(cells)), std::move(values));
}

template <Scalar S>
struct MeasuredValue {
  std::string id;
  Rational measure;
  S value;
};

/// Abstract cells; the declared partition is kept even where the value is zero.
template <Scalar S>
StepFunction<S> from_cells(std::vector<MeasuredValue<S>> cells) {
  std::sort(cells.begin(), cells.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
  std::vector<Cell> part;
  std::vector<S> values;
  for (auto& c : cells) {
    part.push_back({c.id, c.measure, std::nullopt});
    values.push_back(std::move(c.value));
  }
  return StepFunction<S>(std::make_shared<Partition>(std::move(part)), std::move(values));
}

/// Shorthand for value * indicator of [a,b).
template <Scalar S>
StepFunction<S> indicator(const Rational& a, const Rational& b, const S& value) {
  return from_intervals(IntervalSpec<S>{{{a, b, value}}});
}

/// The same function re-expressed on `target`, which must contain every
/// support cell of `f` (geometric containment, or identical abstract id).
template <Scalar S>
StepFunction<S> transfer(const StepFunction<S>& f, const PartitionPtr& target) {
  std::vector<S> values(target->size(), scalar_traits<S>::from_real(real_t<S>(0)));
  const auto& src = f.partition();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (scalar_traits<S>::is_zero(f.value(i))) continue;
    const Cell& cell = src.cells()[i];
    bool placed = false;
    for (std::size_t j = 0; j < target->size(); ++j) {
      const Cell& t = target->cells()[j];
      if (cell.span && t.span) {
        if (cell.span->a <= t.span->a && t.span->b <= cell.span->b) {
          values[j] = f.value(i);
          placed = true;
        }
      } else if (!cell.span && !t.span && t.id == cell.id) {
        if (t.measure != cell.measure)
          throw Error(ErrorKind::IncompatiblePartitions, "cell '" + t.id + "' has two different measures");
        values[j] = f.value(i);
        placed = true;
      }
    }
    if (!placed) throw Error(ErrorKind::IncompatiblePartitions, "cell '" + cell.id + "' is not covered");
  }
  return StepFunction<S>(target, std::move(values));
}

/// Re-expresses every function on one shared partition. Geometric families
/// are split at all endpoints and cells where every function vanishes are
/// dropped; abstract families must already share their partition.
template <Scalar S>
std::vector<StepFunction<S>> common_refinement(std::span<const StepFunction<S>> fs) {
  std::vector<StepFunction<S>> out(fs.begin(), fs.end());
  if (out.empty()) return out;

  const StepFunction<S>* anchor = nullptr;
  bool all_same = true;
  for (const auto& f : out) {
    if (f.partition().empty()) continue;
    if (!anchor)
      anchor = &f;
    else if (!f.shares_partition_with(*anchor))
      all_same = false;
  }
  if (!anchor) return out;
  if (all_same) {
    for (auto& f : out)
      if (f.partition().empty()) f = transfer(f, anchor->partition_ptr());
    return out;
  }

  for (const auto& f : out)
    if (!f.partition().empty() && !f.partition().geometric())
      throw Error(ErrorKind::IncompatiblePartitions, "abstract partitions differ and cannot be intersected");

  std::vector<Rational> cuts;
  for (const auto& f : out)
    for (const auto& c : f.partition().cells()) {
      cuts.push_back(c.span->a);
      cuts.push_back(c.span->b);
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto value_on = [](const StepFunction<S>& f, const Rational& a, const Rational& b) -> std::optional<S> {
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto& sp = *f.partition().cells()[i].span;
      if (sp.a <= a && b <= sp.b) return f.value(i);
    }
    return std::nullopt;
  };

  std::vector<Cell> cells;
  std::vector<std::vector<S>> values(out.size());
  const S zero = scalar_traits<S>::from_real(real_t<S>(0));
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const Rational& a = cuts[k];
    const Rational& b = cuts[k + 1];
    std::vector<S> here;
    bool any_nonzero = false;
    for (const auto& f : out) {
      auto v = value_on(f, a, b);
      here.push_back(v ? *v : zero);
      if (v && !scalar_traits<S>::is_zero(*v)) any_nonzero = true;
    }
    if (!any_nonzero) continue;
    cells.push_back({interval_id(a, b), b - a, Span1D{a, b}});
    for (std::size_t i = 0; i < out.size(); ++i) values[i].push_back(std::move(here[i]));
  }
  auto shared = std::make_shared<const Partition>(std::move(cells));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = StepFunction<S>(shared, std::move(values[i]));
  return out;
}

template <Scalar S>
std::pair<StepFunction<S>, StepFunction<S>> common_refinement(const StepFunction<S>& f, const StepFunction<S>& g) {
  const StepFunction<S> pair[2] = {f, g};
  auto r = common_refinement(std::span<const StepFunction<S>>(pair, 2));
  return {std::move(r[0]), std::move(r[1])};
}

// ---------------------------------------------------------------------------
// Pointwise algebra

namespace detail {

template <Scalar S>
void require_shared(const StepFunction<S>& f, const StepFunction<S>& g) {
  if (!f.shares_partition_with(g))
    throw Error(ErrorKind::IncompatiblePartitions, "operands are not on a shared partition; call common_refinement first");
}

template <Scalar S, class Op>
StepFunction<S> zip(const StepFunction<S>& f, const StepFunction<S>& g, Op op) {
  if (f.partition().empty() && g.partition().empty()) return f;
  if (f.partition().empty()) return zip(transfer(f, g.partition_ptr()), g, op);
  if (g.partition().empty()) return zip(f, transfer(g, f.partition_ptr()), op);
  require_shared(f, g);
  std::vector<S> v;
  v.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v.push_back(op(f.value(i), g.value(i)));
  return StepFunction<S>(f.partition_ptr(), std::move(v));
}

}  // namespace detail

template <Scalar S>
StepFunction<S> pointwise_mul(const StepFunction<S>& f, const StepFunction<S>& g) {
  return detail::zip(f, g, [](const S& a, const S& b) { return a * b; });
}

template <Scalar S>
StepFunction<S> add(const StepFunction<S>& f, const StepFunction<S>& g) {
  return detail::zip(f, g, [](const S& a, const S& b) { return a + b; });
}

template <Scalar S>
StepFunction<S> subtract(const StepFunction<S>& f, const StepFunction<S>& g) {
  return detail::zip(f, g, [](const S& a, const S& b) { return a - b; });
}

template <Scalar S>
StepFunction<S> conj(const StepFunction<S>& f) {
  std::vector<S> v;
  v.reserve(f.size());
  for (const auto& x : f.values()) v.push_back(scalar_traits<S>::conj(x));
  return StepFunction<S>(f.partition_ptr(), std::move(v));
}

template <Scalar S>
StepFunction<S> scale(const S& lambda, const StepFunction<S>& f) {
  std::vector<S> v;
  v.reserve(f.size());
  for (const auto& x : f.values()) v.push_back(lambda * x);
  return StepFunction<S>(f.partition_ptr(), std::move(v));
}

// ---------------------------------------------------------------------------
// Norms and integrals

/// max |f|^2 over cells; exact for rational values.
template <Scalar S>
real_t<S> sup_norm_sq(const StepFunction<S>& f) {
  real_t<S> best(0);
  for (const auto& x : f.values()) {
    auto a = scalar_traits<S>::abs2(x);
    if (best < a) best = a;
  }
  return best;
}

template <Scalar S>
double sup_norm(const StepFunction<S>& f) {
  return std::sqrt(scalar_traits<S>::real_to_double(sup_norm_sq(f)));
}

template <Scalar S>
real_t<S> l2_norm_sq(const StepFunction<S>& f) {
  real_t<S> total(0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if constexpr (is_exact_v<S>)
      total += f.measure(i) * scalar_traits<S>::abs2(f.value(i));
    else
      total += to_double(f.measure(i)) * scalar_traits<S>::abs2(f.value(i));
  }
  return total;
}

namespace detail {

template <Scalar S>
S measure_as(const Rational& m) {
  if constexpr (is_exact_v<S>)
    return S(m);
  else
    return S(to_double(m), 0.0);
}

}  // namespace detail

/// Integral of conj(h f^k) g^(k+1) over a shared partition.
template <Scalar S>
S mixed_moment(const StepFunction<S>& h, const StepFunction<S>& f, const StepFunction<S>& g, unsigned k) {
  S total = scalar_traits<S>::from_real(real_t<S>(0));
  if (h.partition().empty() || g.partition().empty()) return total;
  detail::require_shared(h, g);
  if (k > 0 && !f.partition().empty()) detail::require_shared(f, g);
  const bool f_zero = f.partition().empty();
  for (std::size_t i = 0; i < g.size(); ++i) {
    S fk = (k == 0) ? scalar_traits<S>::from_real(real_t<S>(1))
                    : (f_zero ? scalar_traits<S>::from_real(real_t<S>(0)) : integer_power(f.value(i), k));
    S term = scalar_traits<S>::conj(h.value(i) * fk) * integer_power(g.value(i), k + 1);
    if (scalar_traits<S>::is_zero(term)) continue;
    total += detail::measure_as<S>(g.measure(i)) * term;
  }
  return total;
}

/// <f^k, g^k> = integral of conj(f)^k g^k.
template <Scalar S>
S moment(const StepFunction<S>& f, const StepFunction<S>& g, int k) {
  if (k <= 0) throw Error(ErrorKind::NonpositivePower, "moment order must be positive, got " + std::to_string(k));
  S total = scalar_traits<S>::from_real(real_t<S>(0));
  if (f.partition().empty() || g.partition().empty()) return total;
  detail::require_shared(f, g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    S z = scalar_traits<S>::conj(f.value(i)) * g.value(i);
    if (scalar_traits<S>::is_zero(z)) continue;
    total += detail::measure_as<S>(f.measure(i)) * integer_power(z, static_cast<unsigned>(k));
  }
  return total;
}

/// True iff 4 ||f||_inf ||g||_inf < 1, decided exactly for rational values.
template <Scalar S>
bool log_domain_ok(const StepFunction<S>& f, const StepFunction<S>& g) {
  return real_t<S>(16) * sup_norm_sq(f) * sup_norm_sq(g) < real_t<S>(1);
}

/// Integral of Ln(1 - 4 conj(f) g), principal branch.
template <Scalar S>
Complex log_integral(const StepFunction<S>& f, const StepFunction<S>& g) {
  if (!log_domain_ok(f, g))
    throw Error(ErrorKind::DomainViolation, "log_integral requires 4*||f||_inf*||g||_inf < 1");
  Complex total{};
  if (f.partition().empty() || g.partition().empty()) return total;
  detail::require_shared(f, g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Complex z = std::conj(to_complex(f.value(i))) * to_complex(g.value(i));
    if (z == Complex{}) continue;
    // log1p keeps precision when |4z| is tiny.
    Complex w = -4.0 * z;
    Complex ln = (std::abs(w) < 1e-4) ? w - w * w / 2.0 + w * w * w / 3.0 - w * w * w * w / 4.0 : std::log(1.0 + w);
    total += to_double(f.measure(i)) * ln;
  }
  return total;
}

}  // namespace qfock

#endif  // QFOCK_STEPFN_HPP
