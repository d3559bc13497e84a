#pragma once

// Configuration and result serialization: JSON configs and records, the
// fixed sweep CSV, and run manifests.

#include "heraldsim/experiment.hpp"

#include "json.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace heraldsim {

/// Bad configuration or input values (exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable or unwritable files (exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kToolkitVersion = "0.1.0";

nlohmann::json to_json(const ExperimentConfig& cfg);

/// Applies the keys of `j` over `base`; unknown keys and bad types throw
/// ConfigError naming the field. The result is validated.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base);

/// Reads a config file. A top-level "preset" key ("paper" or "desk") picks
/// the base, otherwise `base` is used.
ExperimentConfig load_config(const std::filesystem::path& path, const ExperimentConfig& base);

/// key=value with a dotted key ("stages.fiber=0.3"); the value is parsed as
/// JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

ExperimentConfig preset_by_name(const std::string& name);

template <typename Count>
nlohmann::json to_json(const BasicCountRecord<Count>& rec) {
  return {{"heralds", rec.heralds},
          {"n1_given_h", rec.n1_given_h},
          {"n2_given_h", rec.n2_given_h},
          {"n12_given_h", rec.n12_given_h},
          {"signal_singles", rec.signal_singles},
          {"idler_singles", rec.idler_singles},
          {"trials", rec.trials},
          {"duration_s", rec.duration_s}};
}

CountRecord count_record_from_json(const nlohmann::json& j);
ExpectedCountRecord expected_record_from_json(const nlohmann::json& j);

struct RunManifest {
  std::string config_digest;  // FNV-1a 64 of the canonical config JSON, hex
  std::uint64_t seed = 0;
  std::string version = kToolkitVersion;
  std::string timestamp;      // UTC, ISO 8601
  std::string command_line;
};

std::string config_digest(const ExperimentConfig& cfg);
RunManifest make_manifest(const ExperimentConfig& cfg, const std::string& command_line);
nlohmann::json to_json(const RunManifest& m);

/// Shortest-form text for probabilities in files: 9 significant digits,
/// '.' decimal point, no grouping; "nan" and "inf" for non-finite values.
std::string format_number(double x);

extern const std::vector<std::string> kSweepColumns;

std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Parses a sweep CSV back into the columns it carries.
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

std::string fringe_csv(const FringeScan& scan);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace heraldsim
