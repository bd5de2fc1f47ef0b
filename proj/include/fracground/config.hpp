#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fracground/model.hpp"
#include "fracground/solver.hpp"

namespace fracground {

enum class Experiment { solve, sweep_eps, uniqueness, coercivity, validate_operator, decay };

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view name);

/// Everything one invocation of the runner needs. Produced by `load_config`
/// with defaults filled and every invariant checked.
struct RunConfig {
  Experiment experiment = Experiment::solve;

  int dim = 1;
  double s = 0.5;
  double p = 3.0;
  double eps = 1.0;
  Point x0;
  PotentialFamily potential = PotentialFamily::constant;
  std::vector<double> potential_params;

  int n = 2048;
  double L = 32.0;

  SolverConfig solver;

  std::vector<double> eps_list;
  std::string output_dir = ".";
  std::uint64_t seed = 0;

  int k = 5;                        ///< uniqueness: number of starts
  int n_probe = 20;                 ///< coercivity: random probes
  int power_steps = 50;             ///< coercivity: power iterations
  Point shift_a;                    ///< coercivity: off-center translation (default 1 along each axis)
  std::optional<double> coercivity_reference;  ///< frozen min quotient
  std::vector<double> fit_window;   ///< decay / sweep: [r1, r2]; empty = [0.3 L, 0.7 L]
  double nu_threshold = 0.05;       ///< sweep: bound on the last nu gap
  int threads = 0;                  ///< sweep workers; 0 = FRACGROUND_THREADS or hardware

  ProblemParams problem() const;
  Grid grid() const;
  /// Re-checks every cross-field invariant; throws ConfigError.
  void validate() const;
};

using ConfigScalar = std::variant<bool, double, std::string>;
using ConfigValue = std::variant<bool, double, std::string, std::vector<ConfigScalar>>;

struct ConfigEntry {
  ConfigValue value;
  int line = 0;
};

/// Flat `key = value` table: `#` comments, numbers, booleans, quoted or bare
/// strings and bracketed lists. Duplicate keys are an error.
std::map<std::string, ConfigEntry> parse_config_table(std::string_view text);

/// Builds a validated RunConfig. Unknown keys are rejected (all of them are
/// listed in the message).
RunConfig config_from_text(std::string_view text, std::optional<Experiment> experiment = std::nullopt);
RunConfig load_config(const std::filesystem::path& path, std::optional<Experiment> experiment = std::nullopt);

/// Every key accepted by the parser.
const std::vector<std::string>& config_keys();

}  // namespace fracground
