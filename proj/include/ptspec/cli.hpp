#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptspec/error.hpp"
#include "ptspec/estimates.hpp"

namespace ptspec {

/// Unknown command or malformed command line.
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class OutputFormat { csv, json };

struct RunConfig {
  int nu = 1;
  double L = 20.0;
  std::size_t n_points = 4096;
  int j_min = -6;
  int j_max = 10;
  double epsilon = 0.5;
  double alpha = 1.0;
  double k_max = 40.0;
  /// Nodes of the k-rule used by transform-check.
  std::size_t n_k_per_band = 4096;
  /// Empty selects each command's own multiplier.
  std::string multiplier_id;
  OutputFormat format = OutputFormat::json;
  std::uint64_t seed = 1;
  /// Execution settings; not part of the digest.
  int jobs = 1;
  std::filesystem::path out_dir = ".";

  /// ConfigError on any invariant violation.
  void validate() const;
  /// Fields that determine the results.
  nlohmann::json to_json() const;
  /// Overlays the keys present in `j` onto this config.
  void merge_json(const nlohmann::json& j);
  std::string digest() const;
};

struct RunReport {
  std::string command;
  std::string config_digest;
  nlohmann::json config;
  std::vector<EstimateReport> reports;
  /// Command-specific data (polynomial coefficients, cube lists).
  nlohmann::json payload = nlohmann::json::object();
  double elapsed_seconds = 0.0;

  bool pass() const;
  /// Deterministic content; elapsed time is left out.
  nlohmann::json to_json() const;
};

const std::vector<std::string>& command_names();

/// Runs one command, or every command for "all". UsageError for an unknown name.
RunReport dispatch(const std::string& command, const RunConfig& config);

/// Writes {command}-{digest}.json (json format only) and {command}-{digest}.csv into
/// config.out_dir and returns the paths. IoError when the directory is not writable.
std::vector<std::filesystem::path> emit(const RunReport& report, const RunConfig& config);

/// Full command-line entry point; returns the process exit status
/// (0 pass, 1 failing estimate, 2 usage or config error, 3 I/O error).
int run_cli(int argc, char** argv);

}  // namespace ptspec
