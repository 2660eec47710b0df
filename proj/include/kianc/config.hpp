#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "json.hpp"

#include "kianc/harness.hpp"

namespace kianc {

/// Thrown for malformed or invalid configuration; the CLI maps it to exit 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepRange {
  double start_hz = 100.0;
  double stop_hz = 600.0;
  double step_hz = 10.0;
};

struct PerturbConfig {
  PerturbationStd std_dev{0.05, 6.0, 3.0};
  std::size_t trials = 50;
  /// Empty means the sweep grid.
  std::vector<double> frequencies_hz;
};

struct FieldConfig {
  std::size_t iteration = 12000;
  MethodSpec method{AlgorithmKind::kIndividualKi, 10.0, {}};
};

/// Fully resolved experiment configuration.
struct ConfigFile {
  Scenario scenario = build_default_scenario();
  Settings settings;
  std::vector<MethodSpec> methods = default_methods();
  double frequency_hz = 200.0;
  SweepRange sweep;
  PerturbConfig perturb;
  FieldConfig field;
  std::string output_dir = "out";

  /// Throws ConfigError.
  void validate() const;
};

/// Parses INI text with sections. Unknown sections or keys are rejected.
ConfigFile parse_config(std::istream& in);
ConfigFile load_config(const std::filesystem::path& path);

/// Canonical JSON echo of the resolved configuration.
nlohmann::json to_json(const ConfigFile& cfg);
/// FNV-1a of the canonical JSON dump without [output], as 16 hex digits.
std::string config_hash(const ConfigFile& cfg);

std::vector<double> parse_real_list(const std::string& text);

}  // namespace kianc
