// zsm: experiment runner.
//
//   zsm list
//   zsm describe <name>
//   zsm run <name> [--config file] --out dir [--seed N] [--threads K]
//
// Exit status: 0 pass, 1 fail, 2 unknown experiment, 3 bad config, 4 other errors.

#include "zsm/cli/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

constexpr int exit_unknown = 2;
constexpr int exit_bad_config = 3;
constexpr int exit_error = 4;

void print_list(std::ostream& out) {
  for (const auto& e : zsm::cli::registry()) out << e.name << "  -  " << e.anchor << "\n";
}

int unknown(const std::string& name) {
  std::cerr << "zsm: unknown experiment '" << name << "'. Registered experiments:\n";
  for (const auto& n : zsm::cli::experiment_names()) std::cerr << "  " << n << "\n";
  return exit_unknown;
}

/// --threads, else ZSM_THREADS, else 1.
int resolve_threads(std::optional<int> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ZSM_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 1024) throw zsm::ConfigError("ZSM_THREADS", "expected an integer in [1, 1024]");
    return static_cast<int>(v);
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-mechanics experiment runner"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List registered experiments");

  std::string describe_name;
  auto* describe = app.add_subcommand("describe", "Describe one experiment");
  describe->add_option("name", describe_name, "Experiment name")->required();

  std::string run_name, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("name", run_name, "Experiment name")->required();
  run->add_option("--config", config_path, "JSON configuration file (defaults when omitted)");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the configured seed");
  run->add_option("--threads", threads, "Worker threads (fallback: ZSM_THREADS)")->check(CLI::Range(1, 1024));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      print_list(std::cout);
      return 0;
    }
    if (*describe) {
      std::cout << zsm::cli::describe(zsm::cli::find_experiment(describe_name));
      return 0;
    }
    const auto& e = zsm::cli::find_experiment(run_name);
    nlohmann::json user = nlohmann::json::object();
    if (!config_path.empty()) user = zsm::load_json_file(config_path);
    const auto v = zsm::cli::run_experiment(e.name, user, out_dir, seed, resolve_threads(threads));
    for (const auto& [name, m] : v.metrics)
      std::cout << (m.passed ? "PASS " : "FAIL ") << name << " = " << m.value << " ("
                << zsm::cli::to_string(m.kind) << " " << m.tolerance << ")\n";
    std::cout << e.name << ": " << (v.passed ? "PASS" : "FAIL") << " in " << v.wall_seconds << " s -> "
              << out_dir << "/verdict.json\n";
    return zsm::cli::exit_code(v);
  } catch (const zsm::cli::UnknownExperiment& ex) {
    return unknown(ex.name());
  } catch (const zsm::ConfigError& ex) {
    std::cerr << "zsm: bad config at " << ex.key_path() << ": " << ex.what() << "\n";
    return exit_bad_config;
  } catch (const std::exception& ex) {
    std::cerr << "zsm: " << ex.what() << "\n";
    return exit_error;
  }
}
