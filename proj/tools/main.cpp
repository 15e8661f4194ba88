#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "smic/config.hpp"
#include "smic/experiments.hpp"
#include "smic/version.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "64-bit RNG seed (no wall-clock seeding)");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--threads", flags.threads, "worker threads for replicated computations")
      ->check(CLI::PositiveNumber);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw smic::ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Defaults (when the command has any) under the user's file, command-line
// flags on top of both.
smic::AppConfig load_config(const CommonFlags& flags, const std::string& defaults) {
  std::string text = defaults.empty() ? "{}" : defaults;
  if (!flags.config_path.empty()) {
    const std::string user = read_file(flags.config_path);
    text = defaults.empty() ? user : smic::merge_config_json(defaults, user);
  }
  smic::AppConfig config = smic::parse_config_json(text);
  if (flags.seed) config.seed = flags.seed;
  if (!flags.out.empty()) config.out_dir = flags.out;
  if (flags.threads > 0) config.threads = flags.threads;
  return config;
}

void report(const smic::ExperimentResult& result) {
  for (const auto& name : result.outputs)
    std::cout << (result.out_dir / name).string() << "\n";
  std::cout << (result.out_dir / "manifest.json").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-Markov interval-censoring model toolkit"};
  app.set_version_flag("--version", smic::kVersion);
  app.require_subcommand(1);

  CommonFlags flags;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Sample ground points and their censored marks");
  add_common_flags(simulate, flags);
  CLI::App* fit = app.add_subcommand("fit", "Fit a kernel family to a marks CSV");
  add_common_flags(fit, flags);
  CLI::App* condition =
      app.add_subcommand("condition", "Sample censored point positions given the marks");
  add_common_flags(condition, flags);
  CLI::App* experiment = app.add_subcommand("experiment", "Run a packaged study");
  std::string experiment_name;
  experiment->add_option("name", experiment_name, "misspec, renewal-panels, or peak-conditional")
      ->required()
      ->check(CLI::IsMember({"misspec", "renewal-panels", "peak-conditional"}));
  add_common_flags(experiment, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      report(smic::run_simulate(load_config(flags, "")));
    } else if (fit->parsed()) {
      report(smic::run_fit(load_config(flags, "")));
    } else if (condition->parsed()) {
      report(smic::run_condition(load_config(flags, "")));
    } else if (experiment->parsed()) {
      const std::string defaults = smic::default_experiment_config(experiment_name);
      report(smic::run_experiment(experiment_name, load_config(flags, defaults)));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
