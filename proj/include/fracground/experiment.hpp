#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "fracground/config.hpp"
#include "fracground/sweep.hpp"

namespace fracground {

inline constexpr const char* kToolVersion = "fracground 0.1.0";

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunOutcome {
  nlohmann::json record;
  std::vector<Verdict> verdicts;
  std::filesystem::path record_path;
  std::filesystem::path table_path;  ///< empty unless a sweep table was written
  std::string error;                 ///< set when the experiment aborted

  bool all_pass() const;
  /// Name of the first failing verdict, or "" when all pass.
  std::string first_failure() const;
};

/// Runs the configured experiment, writes `<experiment>-<timestamp>.record.json`
/// (and the `.sweep.tsv` table for sweeps) under cfg.output_dir, and returns
/// what was written. Numerical failures are captured in the record rather
/// than thrown.
RunOutcome run_experiment(const RunConfig& cfg);

/// Sweep table: header `eps nu max_x [max_y] decay_slope crit_norm profile_gap
/// converged`, one row per eps, numbers as %.17e, converged as 1/0.
std::string format_sweep_table(const SweepReport& report, int dim);

/// JSON text with every floating-point value in %.17e form and non-finite
/// values as null.
std::string serialize_record(const nlohmann::json& record);

/// Writes `content` to `path` through a temporary file in the same directory
/// followed by a rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

nlohmann::json config_echo(const RunConfig& cfg);

/// Fixed 12-significant-digit rendering used for console output.
std::string format12(double x);

}  // namespace fracground
