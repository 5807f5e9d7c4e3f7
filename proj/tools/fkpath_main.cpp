#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fkpath/config.hpp"
#include "fkpath/error.hpp"
#include "fkpath/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kViolation = 2;

std::optional<fkpath::ExperimentConfig> load(const std::string& path) {
  fkpath::ConfigResult res = fkpath::load_config(path);
  if (!res.ok()) {
    for (const std::string& d : res.diagnostics) std::cerr << path << ": " << d << "\n";
    return std::nullopt;
  }
  return *res.config;
}

int cmd_validate(const std::string& path) {
  auto cfg = load(path);
  if (!cfg) return kConfigError;
  std::cout << fkpath::describe_config(*cfg);
  return kOk;
}

int cmd_bounds(const std::string& path) {
  auto cfg = load(path);
  if (!cfg) return kConfigError;
  const fkpath::ModelInstance inst = fkpath::build_instance(*cfg);
  for (const auto& [N, p] : cfg->grid()) {
    std::cout << fkpath::format_bound_report(fkpath::bound_report(*cfg, inst, N, p), N, p);
  }
  return kOk;
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> reps, std::optional<std::string> out) {
  auto cfg = load(path);
  if (!cfg) return kConfigError;
  if (seed) cfg->seed = *seed;
  if (reps) {
    if (*reps < 1) {
      std::cerr << "--reps must be at least 1\n";
      return kConfigError;
    }
    cfg->replications = *reps;
  }
  if (out) cfg->output = *out;
  const fkpath::ExperimentResult res = fkpath::run_experiment(*cfg);
  std::ofstream file(cfg->output, std::ios::binary);
  if (!file) {
    std::cerr << "cannot write " << cfg->output << "\n";
    return kConfigError;
  }
  file << fkpath::format_csv(res.rows);
  std::cout << res.summary << "wrote " << cfg->output << "\n";
  return res.exit_code == 0 ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-space Feynman-Kac truncation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<std::string> out;

  auto* run = app.add_subcommand("run", "Run the configured experiment and write CSV rows");
  run->add_option("config", config_path, "JSON config")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--reps", reps, "Override the replication count");
  run->add_option("--out", out, "Override the output path");

  auto* validate = app.add_subcommand("validate", "Check a config and echo resolved depths");
  validate->add_option("config", config_path, "JSON config")->required();

  auto* bounds = app.add_subcommand("bounds", "Print the bound report without simulating");
  bounds->add_option("config", config_path, "JSON config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path, seed, reps, out);
    if (*validate) return cmd_validate(config_path);
    return cmd_bounds(config_path);
  } catch (const fkpath::FkError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}
