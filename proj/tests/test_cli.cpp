#include <catch_amalgamated.hpp>

#include <cmath>

#include "qfock/cli.hpp"

using namespace qfock;
using Catch::Matchers::WithinAbs;

namespace {

cli::Outcome run_json(const std::string& command, const std::string& text, cli::Options opt = {}) {
  opt.command = command;
  try {
    return cli::run(opt, cli::parse_job(io::Json::parse(text)));
  } catch (const Error& e) {
    return {cli::exit_code_for(e.kind()), cli::error_json(e.kind(), e.message()).dump(), {}};
  }
}

const char* quarter_job = R"({
  "schema_version": 1, "c": "1",
  "functions": {"f": {"intervals": [{"a": 0, "b": 1, "re": "1/4", "im": "0"}]}},
  "f": "f"
})";

std::string spec_path(const std::string& name) { return std::string(QFOCK_SPEC_DIR) + "/" + name; }

}  // namespace

TEST_CASE("function parsing", "[cli]") {
  const auto exact = io::parse_function(io::Json::parse(R"({"intervals": [{"a": 0, "b": "1/2", "re": "1/4", "im": -1}]})"), "f");
  REQUIRE(io::is_exact(exact));
  const auto& f = std::get<ExactFunction>(exact);
  CHECK(f.measure(0) == Rational(1, 2));
  CHECK(f.value(0) == CRational(Rational(1, 4), Rational(-1)));

  const auto fl = io::parse_function(io::Json::parse(R"({"cells": [{"measure": "3/2", "re": 0.125}]})"), "g");
  REQUIRE_FALSE(io::is_exact(fl));
  CHECK(std::get<FloatFunction>(fl).partition().cells()[0].id == "c0");

  const auto dec = io::parse_function(io::Json::parse(R"({"cells": [{"id": "A", "measure": 1, "re": "0.25"}]})"), "h");
  CHECK_FALSE(io::is_exact(dec));

  CHECK_THROWS_AS(io::parse_function(io::Json::parse(R"({"cells": [{"measure": 0, "re": 1}]})"), "x"), Error);
  CHECK_THROWS_AS(io::parse_function(io::Json::parse(R"({"cells": [{"measure": 1, "re": "abc"}]})"), "x"), Error);
  CHECK_THROWS_AS(io::parse_function(io::Json::parse(R"({"intervals": [], "cells": []})"), "x"), Error);
  CHECK_THROWS_AS(io::parse_function(io::Json::parse(R"({"intervals": [{"a": 0, "b": 2, "re": 1}, {"a": 1, "b": 3, "re": 1}]})"), "x"), Error);
}

TEST_CASE("job validation", "[cli]") {
  CHECK_THROWS_AS(cli::parse_job(io::Json::parse(R"({"c": "1"})")), Error);
  CHECK_THROWS_AS(cli::parse_job(io::Json::parse(R"({"schema_version": 2})")), Error);
  CHECK_THROWS_AS(cli::parse_job(io::Json::parse(R"({"schema_version": 1, "c": "-1"})")), Error);
  CHECK_THROWS_AS(cli::parse_job(io::Json::parse(R"({"schema_version": 1, "bogus": 1})")), Error);
  const auto o = run_json("inner", R"({"schema_version": 1, "f": "missing"})");
  CHECK(o.exit_code == cli::InputError);
  CHECK(io::Json::parse(o.output).at("error").at("kind") == "ParseError");
}

TEST_CASE("inner emits exact values", "[cli]") {
  const auto o = run_json("inner", quarter_job);
  REQUIRE(o.exit_code == 0);
  const auto j = io::Json::parse(o.output);
  CHECK(j.at("exact") == true);
  CHECK(j.at("values").size() == 7);
  CHECK(j.at("values")[2].at("re") == "3/32");
}

TEST_CASE("exp-inner on the quarter level", "[cli]") {
  const auto o = run_json("exp-inner", quarter_job);
  REQUIRE(o.exit_code == 0);
  const auto j = io::Json::parse(o.output);
  CHECK_THAT(j.at("series").at("re").get<double>(), WithinAbs(1.1547005, 1e-7));
  CHECK_THAT(j.at("closed").at("re").get<double>(), WithinAbs(1.1547005, 1e-7));
  CHECK(j.at("discrepancy").get<double>() <= 1e-9);
  CHECK(j.at("diagnostics").at("converged") == true);
}

TEST_CASE("exists reports the boundary", "[cli]") {
  const auto o = run_json("exists", R"({
    "schema_version": 1,
    "functions": {"f": {"intervals": [{"a": 0, "b": 1, "re": "1/2"}]}}
  })");
  REQUIRE(o.exit_code == 0);
  const auto v = io::Json::parse(o.output).at("verdicts")[0];
  CHECK(v.at("exists") == false);
  CHECK(v.at("margin") == 0);
}

TEST_CASE("domain errors map to exit code 3", "[cli]") {
  const auto o = run_json("exp-inner", R"({
    "schema_version": 1,
    "functions": {"f": {"intervals": [{"a": 0, "b": 1, "re": "1/2"}]}}, "f": "f"
  })");
  CHECK(o.exit_code == cli::DomainError);
  CHECK(io::Json::parse(o.output).at("error").at("kind") == "DomainViolation");

  cli::Options opt;
  opt.n_max = 5;
  const auto budget = run_json("exp-inner", R"({
    "schema_version": 1,
    "functions": {"f": {"intervals": [{"a": 0, "b": 1, "re": "49/100"}]}}, "f": "f"
  })", opt);
  CHECK(budget.exit_code == cli::DomainError);
}

TEST_CASE("gram writes a CSV next to the JSON report", "[cli]") {
  cli::Options opt;
  opt.out_path = "/tmp/report.json";
  opt.command = "gram";
  const auto o = cli::run(opt, cli::load_job(spec_path("gram_levels.json")));
  REQUIRE(o.exit_code == 0);
  REQUIRE(o.artifacts.size() == 1);
  CHECK(o.artifacts[0].path == "/tmp/report.csv");
  CHECK(o.artifacts[0].content.rfind("i,j,gram_re,gram_im,kernel_re,kernel_im\n", 0) == 0);
  CHECK(io::Json::parse(o.output).at("independent") == true);
}

TEST_CASE("scan-boundary CSV", "[cli]") {
  cli::Options opt;
  opt.command = "scan-boundary";
  const auto o = cli::run(opt, cli::load_job(spec_path("scan_boundary.json")));
  REQUIRE(o.exit_code == 0);
  CHECK(o.output.rfind("rho,n,partial_sum,term,tail_bound\n", 0) == 0);
  CHECK(o.output.find("\n0.5,60,") != std::string::npos);
}

TEST_CASE("verify is deterministic and independent of the thread count", "[cli]") {
  cli::Options opt;
  opt.command = "verify";
  opt.factorization = true;
  const auto job = cli::load_job(spec_path("factorization_example.json"));
  const auto a = cli::run(opt, job);
  opt.jobs = 3;
  const auto b = cli::run(opt, job);
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  opt.seed = 1;
  const auto c = cli::run(opt, job);
  CHECK(c.exit_code == 0);
  CHECK(c.output != a.output);
}

TEST_CASE("bundled specs all run", "[cli]") {
  for (const auto& [command, file] : std::vector<std::pair<std::string, std::string>>{
           {"inner", "inner_quarter.json"},
           {"exp-inner", "exp_inner_quarter.json"},
           {"exists", "exists_half.json"},
           {"gram", "gram_levels.json"},
           {"scan-boundary", "scan_boundary.json"}}) {
    CHECK(cli::execute({command, spec_path(file)}).exit_code == 0);
  }
}
