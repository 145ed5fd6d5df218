#pragma once

// Experiment registry driven by JSON configuration files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace circlelab {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct DataFile {
  std::string name;     // relative to the output directory
  std::string content;
};

struct ExperimentResult {
  std::string experiment;
  nlohmann::json resolved;  // configuration with every default filled in
  std::vector<DataFile> files;
  std::vector<Check> checks;

  bool passed() const;
  std::string summary() const;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

struct ExperimentInfo {
  std::string name;
  std::string description;
};

const std::vector<ExperimentInfo>& experiment_registry();

/// Parses the text of a config file. Throws ConfigError with a line number for malformed
/// text.
nlohmann::json parse_config_text(const std::string& text);
nlohmann::json load_config(const std::filesystem::path& path);

/// Full validation without running; returns the resolved configuration. `expected`, when
/// non-empty, must match the config's "experiment" field. Throws ConfigError naming the key.
nlohmann::json validate_config(const nlohmann::json& config, const std::string& expected = "",
                               const RunOverrides& overrides = {});

ExperimentResult run_experiment(const nlohmann::json& config, const std::string& expected = "",
                                const RunOverrides& overrides = {});

/// Writes manifest.json, summary.txt and every data file under `dir`.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace circlelab
