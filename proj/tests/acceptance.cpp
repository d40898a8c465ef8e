#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "qfock/suite.hpp"

using namespace qfock;
using suite::PropertyResult;

namespace {

struct Criterion {
  int number;
  std::string title;
  std::function<std::vector<PropertyResult>(const suite::Config&)> run;
};

struct Captured {
  std::string output;
  int exit_code = -1;
};

Captured capture(const std::string& command) {
  Captured out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return out;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.output.append(buf.data(), got);
  const int status = pclose(pipe);
  out.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::string summarize(const std::vector<PropertyResult>& results) {
  std::string s;
  for (const auto& r : results) {
    if (!s.empty()) s += "; ";
    s += r.name + " " + (r.passed ? "ok" : "failed") + " (" + std::to_string(r.cases) + " cases";
    if (r.failures) s += ", " + std::to_string(r.failures) + " failures";
    s += ")";
    if (!r.passed && !r.detail.empty()) s += " " + r.detail;
  }
  return s;
}

}  // namespace

int main() {
  suite::Config cfg;
  cfg.jobs = std::max(1u, std::thread::hardware_concurrency());

  const std::vector<Criterion> criteria{
      {1, "oracle equivalence",
       [](const suite::Config& c) {
         auto k = c;
         k.oracle_pairs = 50;
         k.oracle_max_n = 4;
         k.oracle_extra_cases = 5;
         const auto start = std::chrono::steady_clock::now();
         auto r = suite::oracle_equivalence(k);
         const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
         PropertyResult timing{"oracle_runtime", secs < 120.0, 1, secs < 120.0 ? 0u : 1u, secs,
                               std::to_string(secs) + " s"};
         return std::vector<PropertyResult>{r, timing};
       }},
      {2, "closed form vs series",
       [](const suite::Config& c) {
         auto k = c;
         k.series_pairs = 100;
         k.series_tol = 1e-10;
         k.series_rel_tol = 1e-8;
         return std::vector<PropertyResult>{suite::series_vs_closed(k)};
       }},
      {3, "existence boundary",
       [](const suite::Config& c) { return std::vector<PropertyResult>{suite::existence_boundary(c)}; }},
      {4, "step-function ratio law",
       [](const suite::Config& c) {
         auto k = c;
         k.ratio_max_n = 20;
         return std::vector<PropertyResult>{suite::ratio_law(k)};
       }},
      {5, "operator identities",
       [](const suite::Config& c) {
         auto k = c;
         k.identity_max_n = 4;
         auto out = suite::commutator_identities(k);
         out.push_back(suite::annihilation_excess(k, 3));
         out.push_back(suite::order_orthogonality(k, 4));
         return out;
       }},
      {6, "factorization",
       [](const suite::Config& c) {
         auto k = c;
         k.factorization_max_n = 6;
         return std::vector<PropertyResult>{suite::order_n_factorization(k), suite::exponential_factorization(k, 1e-10)};
       }},
      {7, "Gram matrices and independence",
       [](const suite::Config& c) {
         auto k = c;
         k.schur_dim = 5;
         k.schur_max_power = 6;
         return std::vector<PropertyResult>{suite::schur_powers(k, 1e-12), suite::gram_independence(k)};
       }},
      {8, "norm monotonicity",
       [](const suite::Config& c) {
         auto k = c;
         k.monotonicity_pairs = 50;
         k.monotonicity_max_n = 10;
         return std::vector<PropertyResult>{suite::monotonicity(k)};
       }},
      {9, "derivative coefficients",
       [](const suite::Config& c) {
         auto k = c;
         k.derivative_max_n = 6;
         k.derivative_tol = 1e-10;
         return std::vector<PropertyResult>{suite::derivative_check(k)};
       }},
      {10, "CLI determinism",
       [](const suite::Config&) {
         const std::string cmd =
             std::string("'") + QFOCK_CLI_PATH + "' verify --spec '" + QFOCK_SPEC_DIR + "/verify_default.json'";
         const auto a = capture(cmd);
         const auto b = capture(cmd);
         const bool same = a.output == b.output && !a.output.empty();
         const bool ok = same && a.exit_code == 0 && b.exit_code == 0;
         return std::vector<PropertyResult>{
             {"verify_twice", ok, 2, ok ? 0u : 1u, 0.0,
              "exit codes " + std::to_string(a.exit_code) + "," + std::to_string(b.exit_code) +
                  (same ? ", identical output" : ", outputs differ")}};
       }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    std::vector<PropertyResult> results;
    try {
      results = c.run(cfg);
    } catch (const std::exception& e) {
      results.push_back({"exception", false, 0, 1, 0.0, e.what()});
    }
    const bool pass = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
    if (!pass) ++failed;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.number << ": " << c.title << " - "
              << summarize(results) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
