#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mfc/cascade.hpp"

namespace mfc {

/// Parsed experiment file. See README for the JSON schema.
struct ExperimentConfig {
  CascadeConfig cascade;
  int M = 0;
  double p = 2.0;
  std::optional<double> gamma;
  std::vector<double> q_values{0.5, 1.0, 1.5, 2.0};
  std::pair<int, int> j_window{2, 6};
  std::vector<double> t_list;
  std::vector<int> m_list{1, 2, 3, 4, 5};
  int replicates = 200;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output_dir = "out";
  /// Normalized document (defaults filled in); re-parses to the same config.
  nlohmann::json effective;
};

/// Throws ConfigError naming the offending field path. Unknown keys are errors.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Parses text, reporting syntax errors with line and column.
nlohmann::json parse_config_text(const std::string& text);

/// Applies "a.b.c=value"; value is read as JSON, falling back to a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// FNV-1a of the effective config without the scheduling-only keys
/// (workers, output_dir), as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Exit codes of run().
enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_resolution = 3, exit_estimation = 4 };

/// Command-line entry point; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mfc
