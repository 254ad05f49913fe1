#include "c1bench/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>

using namespace c1bench;

namespace {

enum Exit : int {
  kOk = 0,
  kAssertionsFailed = 1,
  kParse = 2,
  kUnknownManifold = 3,
  kMissingField = 4,
  kValidation = 5,
  kIo = 6,
  kOther = 7,
};

int exit_code(Errc c) {
  switch (c) {
    case Errc::parse: return kParse;
    case Errc::unknown_manifold: return kUnknownManifold;
    case Errc::missing_field: return kMissingField;
    case Errc::validation: return kValidation;
    case Errc::io: return kIo;
    default: return kOther;
  }
}

std::string default_out_dir() {
  const char* env = std::getenv("C1BENCH_OUT");
  return env && *env ? env : "c1bench_out";
}

int cmd_run(const std::string& path, int jobs, const std::string& out, std::optional<std::uint64_t> seed) {
  const auto config = load_config(path);
  RunOptions opt;
  opt.jobs = jobs;
  opt.seed = seed;
  const auto rep = run(config, opt);
  const std::string dir = out.empty() ? default_out_dir() : out;
  write_outputs(rep, dir);

  std::cout << "experiment " << config.name << ": " << rep.outcomes.size() << " jobs\n";
  for (const auto& o : rep.outcomes) {
    std::cout << "  " << std::left << std::setw(28) << o.id << std::setw(16) << o.kind;
    if (o.ok)
      std::cout << "ok     ";
    else
      std::cout << "error  ";
    std::cout << std::right << std::fixed << std::setprecision(2) << std::setw(8) << o.seconds << " s";
    if (!o.ok) std::cout << "  [" << o.result.at("code").get<std::string>() << "] " << o.result.at("message").get<std::string>();
    std::cout << "\n";
  }
  std::cout.unsetf(std::ios::floatfield);
  const Json& checks = rep.report.at("assertions");
  std::size_t passed = 0;
  for (const auto& a : checks) {
    if (a.at("pass").get<bool>()) {
      ++passed;
      continue;
    }
    std::cout << "  FAIL " << a.at("job").get<std::string>() << "." << a.at("metric").get<std::string>() << " "
              << a.at("op").get<std::string>() << " " << a.at("value").dump() << " (actual " << a.at("actual").dump()
              << ")\n";
  }
  std::cout << "assertions: " << passed << "/" << checks.size() << " passed\n";
  std::cout << "wall clock: " << std::fixed << std::setprecision(2) << rep.seconds << " s\n";
  std::cout << "report: " << dir << "/report.json\n";
  return rep.assertions_passed ? kOk : kAssertionsFailed;
}

int cmd_validate(const std::string& path) {
  const auto config = load_config(path);
  std::cout << config.to_json().dump(2) << "\n";
  std::cerr << path << ": valid, " << config.jobs.size() << " jobs, " << config.assertions.size() << " assertions\n";
  return kOk;
}

int cmd_list() {
  std::cout << "manifolds:\n";
  for (const auto& e : manifold_catalog()) std::cout << "  " << std::left << std::setw(16) << e.kind << e.parameters << "\n";
  std::cout << "job kinds:\n ";
  for (const auto& k : job_kinds()) std::cout << " " << k;
  std::cout << "\nfields:\n ";
  for (const auto& f : field_names()) std::cout << " " << f;
  std::cout << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"c1bench: numerical checks of C1 estimates for the Poisson equation on model manifolds"};
  app.require_subcommand(1);

  std::string run_path, out_dir;
  int jobs = 1;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "run an experiment config and write report.json plus CSV tables");
  run_cmd->add_option("config", run_path, "JSON config")->required();
  run_cmd->add_option("--jobs,-j", jobs, "jobs run concurrently")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out,-o", out_dir, "output directory (default $C1BENCH_OUT or ./c1bench_out)");
  auto* seed_opt = run_cmd->add_option("--seed,-s", seed, "override the config seed");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "load a config and print it with defaults filled in");
  validate_cmd->add_option("config", validate_path, "JSON config")->required();

  auto* list_cmd = app.add_subcommand("list-manifolds", "list manifold kinds, job kinds and fields");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd)
      return cmd_run(run_path, jobs, out_dir, *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt);
    if (*validate_cmd) return cmd_validate(validate_path);
    if (*list_cmd) return cmd_list();
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  }
  return kOther;
}
