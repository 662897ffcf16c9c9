// Command-line front end: validate and run JSON configurations or presets.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ahtsim/config.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int report_diagnostics(const std::vector<ahtsim::Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << "error: " << d.str() << '\n';
  return diags.empty() ? kExitOk : kExitValidation;
}

int execute(const ahtsim::RunConfig& config, const ahtsim::RunOptions& options) {
  if (const int rc = report_diagnostics(ahtsim::validate(config)); rc != kExitOk) return rc;
  try {
    const ahtsim::RunOutcome out = ahtsim::run(config, options);
    for (const auto& line : out.summary) std::cout << line << '\n';
    std::cout << "wrote " << out.result_file.string() << '\n'
              << "wrote " << out.manifest_file.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Average-Hamiltonian simulator for decoupling and recoupling pulse sequences"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::string log_level = "warn";
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_option("--seed", seed, "Base seed, overrides the config");
  app.add_option("--out", out_dir,
                 std::string("Output directory (default: config, then $") + ahtsim::kOutputDirEnv + ", then .)");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run a JSON configuration");
  run_cmd->add_option("config", config_path, "Configuration file")->required();
  auto* validate_cmd = app.add_subcommand("validate", "Check a configuration without running it");
  validate_cmd->add_option("config", config_path, "Configuration file")->required();

  std::string preset_name;
  bool print_only = false;
  auto* preset_cmd = app.add_subcommand("preset", "Run a built-in configuration");
  preset_cmd->add_option("name", preset_name, "fig2, table1, recouple3 or mrev16-offsets")->required();
  preset_cmd->add_flag("--print", print_only, "Print the preset configuration instead of running it");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  ahtsim::RunOptions options;
  options.threads = threads;
  options.seed = seed;
  if (out_dir) options.out_dir = std::filesystem::path(*out_dir);

  if (*preset_cmd) {
    ahtsim::RunConfig config;
    try {
      config = ahtsim::preset(preset_name);
    } catch (const std::out_of_range& e) {
      std::cerr << "error: " << e.what() << "; available:";
      for (const auto& n : ahtsim::preset_names()) std::cerr << ' ' << n;
      std::cerr << '\n';
      return kExitValidation;
    }
    if (print_only) {
      std::cout << config.document.dump(2) << '\n';
      return kExitOk;
    }
    return execute(config, options);
  }

  ahtsim::RunConfig config;
  try {
    config = ahtsim::RunConfig::load(config_path);
  } catch (const ahtsim::ConfigParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  if (*validate_cmd) {
    const int rc = report_diagnostics(ahtsim::validate(config));
    if (rc == kExitOk) std::cout << "ok\n";
    return rc;
  }
  return execute(config, options);
}
