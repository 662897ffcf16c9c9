#pragma once

// JSON run configurations: validation with field-path diagnostics, presets,
// and execution into result files plus a separate run manifest.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ahtsim {

struct Diagnostic {
  std::string path;  // JSON pointer of the offending field; empty for document-level
  std::string message;

  std::string str() const;
};

struct RunConfig {
  nlohmann::json document;

  static RunConfig parse(std::string_view text);  // throws ConfigParseError
  static RunConfig load(const std::filesystem::path& path);
};

class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kExperimentTypes[] = {"fidelity-scan", "recoupling-check",
                                                   "selectivity", "symmetry-check", "average"};

std::vector<Diagnostic> validate(const RunConfig& config);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides the config and the environment
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

struct RunOutcome {
  std::filesystem::path result_file;
  std::filesystem::path manifest_file;
  /// Human-readable summary lines for the terminal.
  std::vector<std::string> summary;
};

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "AHTSIM_OUT";

/// Runs a validated configuration. Throws on validation or experiment failure.
RunOutcome run(const RunConfig& config, const RunOptions& options = {});

std::vector<std::string> preset_names();
RunConfig preset(std::string_view name);  // throws std::out_of_range

}  // namespace ahtsim
