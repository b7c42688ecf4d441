// SPDX-License-Identifier: Apache-2.0

#ifndef MI_ISAC_CLI_HPP
#define MI_ISAC_CLI_HPP

// Experiment configuration and the command implementations behind the
// `mi_isac` tool. Commands return tables; rendering and file output live here
// too so the tool's main() is a thin wrapper around run().

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mi_isac/analysis.hpp"
#include "mi_isac/physics.hpp"

namespace mi_isac::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kNumericalFailure = 3 };

struct ConfigKey {
  const char* key;    // section.name, as written in config files
  const char* alias;  // short command-line flag name
  const char* default_value;
  const char* help;
};

const std::vector<ConfigKey>& config_keys();

/// Fully parsed and validated configuration.
struct ResolvedConfig {
  CoilSpec<double> coil;
  CarrierSpec<double> carrier;
  MediumModel<double> medium;
  LinkGeometry<double> geometry;
  double temperature_k = 290.0;
  double noise_figure_db = 6.0;
  double insertion_loss_db = 3.0;
  FrameSpec<double> frame;
  std::vector<double> ranges;
  int trials = 500;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  double sweep_theta = 0.0;
  double sweep_phi = 0.0;
  std::vector<double> alphas;
  std::vector<double> snrs_db;
  std::vector<Vector3<double>> geometries;  // (r, theta, phi)

  analysis::Scenario scenario() const;
};

/// Flat key=value configuration: defaults, then a config file, then overrides.
class ExperimentConfig {
 public:
  ExperimentConfig();

  /// Reads `key = value` lines; `[section]` headers prefix the keys that
  /// follow; `#` and `;` start comments. Unknown keys are rejected.
  void load_file(const std::filesystem::path& path);
  void load_text(const std::string& text);
  void set(const std::string& key, const std::string& value);

  const std::map<std::string, std::string>& values() const { return values_; }

  /// Throws Error(ConfigError) on any invalid value.
  ResolvedConfig resolve() const;

 private:
  std::map<std::string, std::string> values_;
};

struct Cell {
  std::string text;
  nlohmann::ordered_json json;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;  // emitted as '#' comment lines
};

Table cmd_channel(const ResolvedConfig& config);
Table cmd_crb_curve(const ResolvedConfig& config);
Table cmd_fim_rank(const ResolvedConfig& config);
Table cmd_resolution(const ResolvedConfig& config);
Table cmd_isac_gain(const ResolvedConfig& config);

std::string render_csv(const Table& table, const std::string& command,
                       const ExperimentConfig& config);
std::string render_json(const Table& table);

/// Writes via a temporary file in the same directory, then renames.
void write_atomically(const std::filesystem::path& path, const std::string& contents);

/// Entry point of the tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mi_isac::cli

#endif  // MI_ISAC_CLI_HPP
