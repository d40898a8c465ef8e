#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "qfock/cli.hpp"

namespace {

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qfock;
  cli::Options opt;
  CLI::App app{"Exact and numerical computations in the quadratic Fock space"};
  app.add_option("command", opt.command, "inner | exp-inner | exists | gram | verify | scan-boundary")
      ->required()
      ->check(CLI::IsMember(cli::commands()));
  app.add_option("--spec", opt.spec_path, "job file (JSON)")->required();
  app.add_option("--out", opt.out_path, "write the result here instead of stdout");
  app.add_option("--format", opt.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--tol", opt.tol, "absolute tolerance for series truncation");
  app.add_option("--n", opt.n, "order");
  app.add_option("--n-max", opt.n_max, "largest order to evaluate");
  app.add_option("--seed", opt.seed, "seed for randomized suites");
  app.add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--factorization", opt.factorization, "verify: only the factorization properties");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << cli::error_json(ErrorKind::ParseError, e.what()).dump(2) << '\n';
    return cli::InputError;
  }

  auto outcome = cli::execute(opt);
  const bool failed_early = outcome.exit_code == cli::InputError || outcome.exit_code == cli::DomainError;
  if (opt.out_path.empty() || failed_early) {
    std::cout << outcome.output;
  } else if (!write_file(opt.out_path, outcome.output)) {
    std::cout << cli::error_json(ErrorKind::InvalidArgument, "cannot write '" + opt.out_path + "'").dump(2) << '\n';
    return cli::InputError;
  }
  for (const auto& a : outcome.artifacts)
    if (!write_file(a.path, a.content)) {
      std::cout << cli::error_json(ErrorKind::InvalidArgument, "cannot write '" + a.path + "'").dump(2) << '\n';
      return cli::InputError;
    }
  return outcome.exit_code;
}
