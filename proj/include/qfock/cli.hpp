#ifndef QFOCK_CLI_HPP
#define QFOCK_CLI_HPP

// Job execution behind the `qfock` command-line tool. Kept in the library so
// the same code path can be driven in-process by tests.

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qfock/error.hpp"
#include "qfock/factorization.hpp"
#include "qfock/fock_core.hpp"
#include "qfock/gram.hpp"
#include "qfock/io.hpp"
#include "qfock/suite.hpp"

namespace qfock::cli {

using io::Json;

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { Ok = 0, VerificationFailed = 1, InputError = 2, DomainError = 3 };

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DomainViolation:
    case ErrorKind::NoConvergenceWithinBudget:
    case ErrorKind::OracleBudgetExceeded:
      return DomainError;
    default:
      return InputError;
  }
}

struct Options {
  std::string command;
  std::string spec_path;
  std::string out_path;
  std::string format;  // empty: command default
  std::optional<double> tol;
  std::optional<unsigned> n;
  std::optional<unsigned> n_max;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool factorization = false;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"inner", "exp-inner", "exists", "gram", "verify", "scan-boundary"};
  return names;
}

/// A parsed job file. Functions keep their declaration order.
struct JobSpec {
  io::Number c;
  std::vector<std::pair<std::string, io::AnyFunction>> functions;
  Json raw;

  const io::AnyFunction& function(const std::string& name) const {
    for (const auto& [k, f] : functions)
      if (k == name) return f;
    throw Error(ErrorKind::ParseError, "unknown function '" + name + "'");
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& kv : functions) out.push_back(kv.first);
    return out;
  }
};

inline JobSpec parse_job(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "job file must be a JSON object");
  if (!j.contains("schema_version")) throw Error(ErrorKind::ParseError, "missing 'schema_version'");
  if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != kSchemaVersion)
    throw Error(ErrorKind::ParseError, "unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  static const std::vector<std::string> known{"schema_version", "c", "functions", "f", "g", "targets", "family",
                                              "options", "suite", "factorization", "scan", "description"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw Error(ErrorKind::ParseError, "unknown key '" + key + "'");
  JobSpec spec;
  spec.raw = j;
  spec.c = j.contains("c") ? io::parse_number(j.at("c"), "c") : io::Number{Rational(1), 1.0};
  if (!(spec.c.value > 0) || (spec.c.exact && *spec.c.exact <= 0)) throw Error(ErrorKind::ParseError, "c must be positive");
  if (j.contains("functions")) {
    if (!j.at("functions").is_object()) throw Error(ErrorKind::ParseError, "'functions' must be an object");
    for (const auto& [name, fj] : j.at("functions").items()) spec.functions.emplace_back(name, io::parse_function(fj, name));
  }
  return spec;
}

inline JobSpec load_job(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open spec file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed JSON: ") + e.what());
  }
  return parse_job(j);
}

struct Artifact {
  std::string path;
  std::string content;
};

struct Outcome {
  int exit_code = Ok;
  std::string output;               // what goes to --out or stdout
  std::vector<Artifact> artifacts;  // extra files next to --out
};

inline Json error_json(ErrorKind kind, const std::string& message) {
  return Json{{"error", Json{{"kind", to_string(kind)}, {"message", message}}}};
}

namespace detail {

inline std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  // shortest representation that reads back to the same double
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, io::clean(x));
  return std::string(buf, r.ptr);
}

inline Json c_json(const io::Number& c) {
  if (c.exact) return to_string(*c.exact);
  return c.value;
}

template <class T>
T option(const JobSpec& spec, const std::string& key, const std::optional<T>& flag, T fallback) {
  if (flag) return *flag;
  if (spec.raw.contains("options") && spec.raw.at("options").contains(key)) {
    try {
      return spec.raw.at("options").at(key).get<T>();
    } catch (const Json::exception&) {
      throw Error(ErrorKind::ParseError, "option '" + key + "' has the wrong type");
    }
  }
  return fallback;
}

inline std::string name_field(const JobSpec& spec, const std::string& key, const std::string& fallback = "") {
  if (spec.raw.contains(key)) {
    if (!spec.raw.at(key).is_string()) throw Error(ErrorKind::ParseError, "'" + key + "' must name a function");
    return spec.raw.at(key).get<std::string>();
  }
  if (!fallback.empty()) return fallback;
  throw Error(ErrorKind::ParseError, "missing '" + key + "'");
}

inline std::vector<std::string> name_list(const JobSpec& spec, const std::string& key) {
  if (!spec.raw.contains(key)) return spec.names();
  std::vector<std::string> out;
  for (const auto& v : spec.raw.at(key)) {
    if (!v.is_string()) throw Error(ErrorKind::ParseError, "'" + key + "' must list function names");
    out.push_back(v.get<std::string>());
  }
  return out;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline std::string sibling(const std::string& path, const std::string& ext) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + ext;
  return path.substr(0, dot) + ext;
}

inline Outcome run_inner(const Options& opt, const JobSpec& spec, const std::string& format) {
  const auto fname = name_field(spec, "f");
  const auto gname = name_field(spec, "g", fname);
  const auto& f = spec.function(fname);
  const auto& g = spec.function(gname);
  const unsigned n = option<unsigned>(spec, "n", opt.n, 6);
  Json values = Json::array();
  std::ostringstream csv;
  csv << "n,re,im\n";
  const bool exact = io::is_exact(f) && io::is_exact(g) && spec.c.is_exact();
  if (exact) {
    const auto table = inner_table(std::get<ExactFunction>(f), std::get<ExactFunction>(g), n, *spec.c.exact).values;
    for (unsigned k = 0; k <= n; ++k) {
      Json row{{"n", k}, {"re", to_string(table[k].re)}, {"im", to_string(table[k].im)}};
      row["approx"] = io::complex_json(to_complex(table[k]));
      values.push_back(row);
      csv << k << ',' << to_string(table[k].re) << ',' << to_string(table[k].im) << '\n';
    }
  } else {
    const auto table = inner_table(io::as_float(f), io::as_float(g), n, spec.c.value).values;
    for (unsigned k = 0; k <= n; ++k) {
      values.push_back(Json{{"n", k}, {"re", table[k].real()}, {"im", table[k].imag()}});
      csv << k << ',' << num(table[k].real()) << ',' << num(table[k].imag()) << '\n';
    }
  }
  if (format == "csv") return {Ok, csv.str(), {}};
  Json out{{"command", "inner"}, {"c", c_json(spec.c)}, {"f", fname}, {"g", gname}, {"exact", exact}, {"values", values}};
  return {Ok, dump(out), {}};
}

inline Outcome run_exp_inner(const Options& opt, const JobSpec& spec, const std::string& format) {
  const auto fname = name_field(spec, "f");
  const auto gname = name_field(spec, "g", fname);
  const auto f = io::as_float(spec.function(fname));
  const auto g = io::as_float(spec.function(gname));
  const double tol = option<double>(spec, "tol", opt.tol, 1e-10);
  const unsigned n_max = option<unsigned>(spec, "n_max", opt.n_max, 400);
  const auto series = exp_inner_series(f, g, spec.c.value, tol, n_max);
  const auto closed = exp_inner_closed(f, g, spec.c.value);
  const double discrepancy = std::abs(series.value - closed);
  const double relative = discrepancy / std::abs(closed);
  const auto& d = series.diagnostics;
  if (format == "csv") {
    std::ostringstream csv;
    csv << "series_re,series_im,closed_re,closed_im,discrepancy,relative_discrepancy,truncation_order,tail_bound\n"
        << num(series.value.real()) << ',' << num(series.value.imag()) << ',' << num(closed.real()) << ','
        << num(closed.imag()) << ',' << num(discrepancy) << ',' << num(relative) << ',' << d.truncation_order << ','
        << num(d.tail_bound) << '\n';
    return {Ok, csv.str(), {}};
  }
  Json out{{"command", "exp-inner"},
           {"c", c_json(spec.c)},
           {"f", fname},
           {"g", gname},
           {"series", io::complex_json(series.value)},
           {"closed", io::complex_json(closed)},
           {"discrepancy", discrepancy},
           {"relative_discrepancy", relative},
           {"diagnostics", Json{{"truncation_order", d.truncation_order},
                                {"partial_sum", io::complex_json(d.partial_sum)},
                                {"tail_bound", d.tail_bound},
                                {"ratio_estimate", d.ratio_estimate},
                                {"converged", d.converged},
                                {"tol", tol}}}};
  return {Ok, dump(out), {}};
}

inline Outcome run_exists(const Options&, const JobSpec& spec, const std::string& format) {
  Json verdicts = Json::array();
  std::ostringstream csv;
  csv << "name,exists,sup_norm,margin\n";
  for (const auto& name : name_list(spec, "targets")) {
    const auto v = std::visit([](const auto& f) { return exists_exponential(f); }, spec.function(name));
    Json row{{"name", name}, {"exists", v.exists}, {"sup_norm", v.sup_norm}, {"margin", v.margin}};
    if (v.exact_margin) row["exact_margin"] = to_string(*v.exact_margin);
    verdicts.push_back(row);
    csv << name << ',' << (v.exists ? "true" : "false") << ',' << num(v.sup_norm) << ','
        << (v.exact_margin ? to_string(*v.exact_margin) : num(v.margin)) << '\n';
  }
  if (format == "csv") return {Ok, csv.str(), {}};
  return {Ok, dump(Json{{"command", "exists"}, {"verdicts", verdicts}}), {}};
}

inline Json matrix_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(io::complex_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

inline Outcome run_gram(const Options& opt, const JobSpec& spec, const std::string& format) {
  const auto names = name_list(spec, "family");
  std::vector<FloatFunction> family;
  for (const auto& name : names) family.push_back(io::as_float(spec.function(name)));
  const double tol = option<double>(spec, "tol", opt.tol, 1e-10);
  const auto r = gram_matrix(std::span<const FloatFunction>(family), spec.c.value, tol, opt.jobs);

  std::ostringstream csv;
  csv << "i,j,gram_re,gram_im,kernel_re,kernel_im\n";
  for (Eigen::Index i = 0; i < r.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < r.matrix.cols(); ++j)
      csv << i << ',' << j << ',' << num(r.matrix(i, j).real()) << ',' << num(r.matrix(i, j).imag()) << ','
          << num(r.kernel_matrix(i, j).real()) << ',' << num(r.kernel_matrix(i, j).imag()) << '\n';
  if (format == "csv") return {Ok, csv.str(), {}};

  Json distinct = Json::array();
  for (const auto& row : r.pairwise_distinct) distinct.push_back(row);
  Json out{{"command", "gram"},
           {"c", c_json(spec.c)},
           {"family", names},
           {"matrix", matrix_json(r.matrix)},
           {"kernel_matrix", matrix_json(r.kernel_matrix)},
           {"min_eigenvalue", r.min_eigenvalue},
           {"spectral_norm", r.spectral_norm},
           {"tol", r.tol},
           {"psd", r.psd},
           {"independent", r.independent},
           {"pairwise_distinct", distinct}};
  Outcome o{Ok, dump(out), {}};
  if (!opt.out_path.empty()) o.artifacts.push_back({sibling(opt.out_path, ".csv"), csv.str()});
  return o;
}

inline suite::Config suite_config(const Options& opt, const JobSpec& spec) {
  suite::Config cfg;
  cfg.seed = opt.seed;
  cfg.jobs = opt.jobs;
  if (!spec.c.exact) throw Error(ErrorKind::NonRationalInput, "verify needs an exact rational c");
  cfg.c = *spec.c.exact;
  if (!spec.raw.contains("suite")) return cfg;
  const Json& s = spec.raw.at("suite");
  if (!s.is_object()) throw Error(ErrorKind::ParseError, "'suite' must be an object");
  std::map<std::string, unsigned*> counts{
      {"oracle_pairs", &cfg.oracle_pairs},         {"oracle_max_n", &cfg.oracle_max_n},
      {"oracle_extra_cases", &cfg.oracle_extra_cases}, {"identity_cases", &cfg.identity_cases},
      {"identity_max_n", &cfg.identity_max_n},     {"lemma2_cases", &cfg.lemma2_cases},
      {"confluence_words", &cfg.confluence_words}, {"confluence_max_len", &cfg.confluence_max_len},
      {"factorization_cases", &cfg.factorization_cases}, {"factorization_max_n", &cfg.factorization_max_n},
      {"series_pairs", &cfg.series_pairs},         {"ratio_cases", &cfg.ratio_cases},
      {"ratio_max_n", &cfg.ratio_max_n},           {"monotonicity_pairs", &cfg.monotonicity_pairs},
      {"monotonicity_max_n", &cfg.monotonicity_max_n}, {"schur_cases", &cfg.schur_cases},
      {"schur_dim", &cfg.schur_dim},               {"schur_max_power", &cfg.schur_max_power},
      {"kernel_families", &cfg.kernel_families},   {"derivative_cases", &cfg.derivative_cases},
      {"derivative_max_n", &cfg.derivative_max_n}, {"boundary_n_max", &cfg.boundary_n_max}};
  std::map<std::string, double*> reals{{"series_tol", &cfg.series_tol},
                                       {"series_rel_tol", &cfg.series_rel_tol},
                                       {"derivative_tol", &cfg.derivative_tol}};
  for (const auto& [key, value] : s.items()) {
    if (auto it = counts.find(key); it != counts.end() && value.is_number_unsigned())
      *it->second = value.get<unsigned>();
    else if (auto rt = reals.find(key); rt != reals.end() && value.is_number())
      *rt->second = value.get<double>();
    else
      throw Error(ErrorKind::ParseError, "bad suite setting '" + key + "'");
  }
  return cfg;
}

inline RegionSplit parse_split(const Json& j) {
  if (!j.is_array()) throw Error(ErrorKind::ParseError, "'split' must be an array of cell-id arrays");
  RegionSplit split;
  for (const auto& part : j) {
    if (!part.is_array()) throw Error(ErrorKind::ParseError, "'split' must be an array of cell-id arrays");
    std::vector<std::string> ids;
    for (const auto& id : part) ids.push_back(id.get<std::string>());
    split.parts.push_back(std::move(ids));
  }
  return split;
}

/// Checks the user-supplied factorization job on top of the random suite.
inline std::vector<suite::PropertyResult> user_factorization(const Options& opt, const JobSpec& spec) {
  const Json& fj = spec.raw.at("factorization");
  if (!fj.is_object() || !fj.contains("f") || !fj.contains("split"))
    throw Error(ErrorKind::ParseError, "'factorization' needs 'f' and 'split'");
  const auto fname = fj.at("f").get<std::string>();
  const auto gname = fj.contains("g") ? fj.at("g").get<std::string>() : fname;
  const auto split = parse_split(fj.at("split"));
  const auto& f = spec.function(fname);
  const auto& g = spec.function(gname);
  std::vector<suite::PropertyResult> out;
  const double tol = option<double>(spec, "tol", opt.tol, 1e-10);
  const auto ff = io::as_float(f);
  const auto gf = io::as_float(g);
  auto [fs, gs] = common_refinement(ff, gf);
  const auto e = check_exponential_factorization(fs, gs, split, spec.c.value, tol);
  out.push_back({"user_exponential_factorization", e.passed, 1, e.passed ? 0u : 1u,
                 std::max(e.closed_rel_error, e.series_rel_error), fname + "/" + gname});
  if (split.parts.size() == 2 && io::is_exact(f) && io::is_exact(g) && spec.c.exact) {
    const unsigned n_max = option<unsigned>(spec, "n", opt.n, 6);
    auto [fe, ge] = common_refinement(std::get<ExactFunction>(f), std::get<ExactFunction>(g));
    bool ok = true;
    double worst = 0.0;
    for (unsigned n = 0; n <= n_max; ++n) {
      const auto r = check_order_n_factorization(fe, ge, split, n, *spec.c.exact);
      ok = ok && r.discrepancy.is_zero();
      worst = std::max(worst, std::abs(to_complex(r.discrepancy)));
    }
    out.push_back({"user_order_n_factorization", ok, n_max + 1, ok ? 0u : 1u, worst,
                   fname + "/" + gname + ", n<=" + std::to_string(n_max)});
  }
  return out;
}

inline Outcome run_verify(const Options& opt, const JobSpec& spec, const std::string& format) {
  const auto cfg = suite_config(opt, spec);
  std::vector<suite::PropertyResult> results;
  if (opt.factorization) {
    results = suite::run_factorization(cfg);
    if (spec.raw.contains("factorization"))
      for (auto& r : user_factorization(opt, spec)) results.push_back(std::move(r));
  } else {
    results = suite::run_all(cfg);
  }
  bool all = true;
  Json props = Json::array();
  std::ostringstream csv;
  csv << "property,passed,cases,failures,max_discrepancy\n";
  for (const auto& r : results) {
    all = all && r.passed;
    props.push_back(Json{{"name", r.name},
                         {"passed", r.passed},
                         {"cases", r.cases},
                         {"failures", r.failures},
                         {"max_discrepancy", r.max_discrepancy},
                         {"detail", r.detail}});
    csv << r.name << ',' << (r.passed ? "true" : "false") << ',' << r.cases << ',' << r.failures << ','
        << num(r.max_discrepancy) << '\n';
  }
  const int code = all ? Ok : VerificationFailed;
  if (format == "csv") return {code, csv.str(), {}};
  Json out{{"command", "verify"},
           {"c", c_json(spec.c)},
           {"seed", cfg.seed},
           {"mode", opt.factorization ? "factorization" : "full"},
           {"passed", all},
           {"properties", props}};
  return {code, dump(out), {}};
}

inline Outcome run_scan(const Options& opt, const JobSpec& spec, const std::string& format) {
  if (!spec.raw.contains("scan")) throw Error(ErrorKind::ParseError, "scan-boundary needs a 'scan' object");
  const Json& s = spec.raw.at("scan");
  if (!s.contains("rho_min") || !s.contains("rho_max"))
    throw Error(ErrorKind::ParseError, "'scan' needs 'rho_min' and 'rho_max'");
  const auto lo = io::parse_number(s.at("rho_min"), "rho_min");
  const auto hi = io::parse_number(s.at("rho_max"), "rho_max");
  const unsigned steps = s.contains("steps") ? s.at("steps").get<unsigned>() : 11;
  if (steps == 0) throw Error(ErrorKind::ParseError, "'steps' must be positive");
  const Rational a = s.contains("a") ? io::parse_coordinate(s.at("a"), "a") : Rational(0);
  const Rational b = s.contains("b") ? io::parse_coordinate(s.at("b"), "b") : Rational(1);
  const unsigned n_max = option<unsigned>(spec, "n_max", opt.n_max, 100);

  std::ostringstream csv;
  csv << "rho,n,partial_sum,term,tail_bound\n";
  Json scans = Json::array();
  for (unsigned k = 0; k < steps; ++k) {
    // exact grid when both ends are exact, so rho = 1/2 lands on the boundary
    Rational rho_q;
    double rho;
    if (lo.exact && hi.exact) {
      rho_q = steps == 1 ? *lo.exact : *lo.exact + (*hi.exact - *lo.exact) * Rational(k, steps - 1);
      rho = to_double(rho_q);
    } else {
      rho = steps == 1 ? lo.value : lo.value + (hi.value - lo.value) * k / (steps - 1);
      rho_q = Rational(rho);
    }
    const auto f = indicator<CRational>(a, b, CRational(rho_q));
    const auto rows = series_trajectory(f, f, spec.c.value, n_max);
    Json jrows = Json::array();
    for (const auto& r : rows) {
      csv << num(rho) << ',' << r.n << ',' << num(r.partial_sum.real()) << ',' << num(r.term.real()) << ','
          << num(r.tail_bound) << '\n';
      jrows.push_back(Json{{"n", r.n}, {"partial_sum", r.partial_sum.real()}, {"term", r.term.real()},
                           {"tail_bound", std::isfinite(r.tail_bound) ? Json(r.tail_bound) : Json("inf")}});
    }
    scans.push_back(Json{{"rho", rho}, {"exists", exists_exponential(f).exists}, {"rows", jrows}});
  }
  if (format == "json")
    return {Ok, dump(Json{{"command", "scan-boundary"}, {"c", c_json(spec.c)}, {"scans", scans}}), {}};
  return {Ok, csv.str(), {}};
}

}  // namespace detail

/// Runs one job against an already parsed spec. Library errors propagate.
inline Outcome run(const Options& opt, const JobSpec& spec) {
  std::string format = opt.format;
  if (format.empty()) format = opt.command == "scan-boundary" ? "csv" : "json";
  if (format != "json" && format != "csv") throw Error(ErrorKind::ParseError, "format must be json or csv");
  if (opt.command == "inner") return detail::run_inner(opt, spec, format);
  if (opt.command == "exp-inner") return detail::run_exp_inner(opt, spec, format);
  if (opt.command == "exists") return detail::run_exists(opt, spec, format);
  if (opt.command == "gram") return detail::run_gram(opt, spec, format);
  if (opt.command == "verify") return detail::run_verify(opt, spec, format);
  if (opt.command == "scan-boundary") return detail::run_scan(opt, spec, format);
  throw Error(ErrorKind::ParseError, "unknown command '" + opt.command + "'");
}

/// Loads the spec, runs the job and converts any error into an error
/// document with the matching exit code.
inline Outcome execute(const Options& opt) {
  try {
    return run(opt, load_job(opt.spec_path));
  } catch (const Error& e) {
    return {exit_code_for(e.kind()), detail::dump(error_json(e.kind(), e.message())), {}};
  } catch (const Json::exception& e) {
    return {InputError, detail::dump(error_json(ErrorKind::ParseError, e.what())), {}};
  }
}

}  // namespace qfock::cli

#endif  // QFOCK_CLI_HPP
