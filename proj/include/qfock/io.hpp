#ifndef QFOCK_IO_HPP
#define QFOCK_IO_HPP

// JSON front-end for test functions and job files.
//
// A function is either
//   {"intervals": [{"a": 0, "b": 1, "re": "1/4", "im": "0"}, ...]}
// or
//   {"cells": [{"id": "A", "measure": "3/2", "re": "1/8", "im": "0"}, ...]}
// Values given as integers or "p/q" strings are exact; decimals (JSON
// floats or strings like "0.25") make the whole function floating point.

#include <json.hpp>

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qfock/error.hpp"
#include "qfock/rational.hpp"
#include "qfock/stepfn.hpp"

namespace qfock::io {

using Json = nlohmann::ordered_json;

/// A number as written in a job file: exact when it was an integer or "p/q".
struct Number {
  std::optional<Rational> exact;
  double value = 0.0;

  bool is_exact() const { return exact.has_value(); }
};

inline Number parse_number(const Json& j, const std::string& where) {
  if (j.is_number_integer()) {
    const auto v = j.get<long long>();
    return {Rational(v), static_cast<double>(v)};
  }
  if (j.is_number_float()) return {std::nullopt, j.get<double>()};
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (auto q = parse_rational(s)) return {*q, to_double(*q)};
    try {
      std::size_t used = 0;
      const double d = std::stod(s, &used);
      if (used == s.size()) return {std::nullopt, d};
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::ParseError, where + ": '" + s + "' is not a number");
  }
  throw Error(ErrorKind::ParseError, where + ": expected a number or a numeric string");
}

/// Geometry is always exact; a float endpoint is taken at its binary value.
inline Rational parse_coordinate(const Json& j, const std::string& where) {
  auto n = parse_number(j, where);
  if (n.exact) return *n.exact;
  if (!std::isfinite(n.value)) throw Error(ErrorKind::ParseError, where + ": not finite");
  return Rational(n.value);
}

using AnyFunction = std::variant<ExactFunction, FloatFunction>;

inline bool is_exact(const AnyFunction& f) { return std::holds_alternative<ExactFunction>(f); }

inline FloatFunction as_float(const AnyFunction& f) {
  return std::visit([](const auto& g) { return FloatFunction(to_float(g)); }, f);
}

inline AnyFunction parse_function(const Json& j, const std::string& name) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "function '" + name + "' must be an object");
  const bool has_intervals = j.contains("intervals");
  const bool has_cells = j.contains("cells");
  if (has_intervals == has_cells)
    throw Error(ErrorKind::ParseError, "function '" + name + "' needs exactly one of 'intervals' or 'cells'");
  const Json& items = has_intervals ? j.at("intervals") : j.at("cells");
  if (!items.is_array()) throw Error(ErrorKind::ParseError, "function '" + name + "': expected an array");

  struct Raw {
    std::string id;
    Rational a, b, measure;
    Number re, im;
  };
  std::vector<Raw> raws;
  bool exact = true;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Json& it = items[i];
    const std::string where = "function '" + name + "' entry " + std::to_string(i);
    if (!it.is_object()) throw Error(ErrorKind::ParseError, where + ": expected an object");
    Raw r;
    r.re = it.contains("re") ? parse_number(it.at("re"), where + " re") : Number{Rational(0), 0.0};
    r.im = it.contains("im") ? parse_number(it.at("im"), where + " im") : Number{Rational(0), 0.0};
    if (has_intervals) {
      if (!it.contains("a") || !it.contains("b")) throw Error(ErrorKind::ParseError, where + ": needs 'a' and 'b'");
      r.a = parse_coordinate(it.at("a"), where + " a");
      r.b = parse_coordinate(it.at("b"), where + " b");
    } else {
      if (!it.contains("measure")) throw Error(ErrorKind::ParseError, where + ": needs 'measure'");
      r.measure = parse_coordinate(it.at("measure"), where + " measure");
      if (r.measure <= 0) throw Error(ErrorKind::ParseError, where + ": measure must be positive");
      r.id = it.contains("id") ? it.at("id").get<std::string>() : "c" + std::to_string(i);
    }
    exact = exact && r.re.is_exact() && r.im.is_exact();
    raws.push_back(std::move(r));
  }

  auto build = [&]<class S>(auto value_of) -> StepFunction<S> {
    if (has_intervals) {
      IntervalSpec<S> spec;
      for (const auto& r : raws) spec.intervals.push_back({r.a, r.b, value_of(r)});
      return from_intervals(spec);
    }
    std::vector<MeasuredValue<S>> cells;
    for (const auto& r : raws) cells.push_back({r.id, r.measure, value_of(r)});
    return from_cells(std::move(cells));
  };
  if (exact) return build.template operator()<CRational>([](const Raw& r) { return CRational(*r.re.exact, *r.im.exact); });
  return build.template operator()<Complex>([](const Raw& r) { return Complex(r.re.value, r.im.value); });
}

// ---------------------------------------------------------------------------
// Output helpers

/// Negative zero is printed as 0 so equal values always serialize alike.
inline double clean(double x) { return x == 0.0 ? 0.0 : x; }

inline Json complex_json(const Complex& z) { return Json{{"re", clean(z.real())}, {"im", clean(z.imag())}}; }

inline Json exact_json(const CRational& z) {
  return Json{{"re", to_string(z.re)}, {"im", to_string(z.im)}};
}

}  // namespace qfock::io

#endif  // QFOCK_IO_HPP
