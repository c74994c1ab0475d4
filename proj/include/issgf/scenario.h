#pragma once

/// @file
/// Versioned JSON experiment descriptions for the `simulate` command.
///
///   {
///     "version": 1,
///     "seed": 7,
///     "problem": {"target": M, "k": 3}
///              | {"dataset_csv": "data.csv", "n": 2, "m": 2, "k": 3},
///     "init": {"kind": "explicit", "P": M, "Q": M}
///           | {"kind": "seeded-random", "scale": 1.0}
///           | {"kind": "spurious", "keep": [0], "balance": [1.0]},
///     "disturbance": {...},
///     "integrator": {...},
///     "outputs": [{"format": "csv" | "json", "path": "out.csv"}]
///   }
///
/// Matrices use the encodings of json_util.h. Relative dataset and output
/// paths resolve against the scenario file's directory.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "issgf/flow_simulator.h"
#include "issgf/json_util.h"

namespace issgf {

inline constexpr int kScenarioVersion = 1;

struct ProblemSource {
  std::optional<Matrix> target;
  std::optional<std::string> dataset_csv;
  /// Column split of the dataset CSV.
  int n = 0;
  int m = 0;
  int k = 0;
  bool allow_underparameterized = false;
};

enum class InitKind { kExplicit, kSeededRandom, kSpurious };

std::string ToString(InitKind kind);

struct InitSpec {
  InitKind kind = InitKind::kSeededRandom;
  ParamState state;
  /// Seeded-random entries are U(−scale, scale).
  double scale = 1.0;
  std::vector<int> keep;
  std::vector<double> balance;
};

struct OutputRequest {
  /// "csv" or "json".
  std::string format;
  std::string path;
};

struct Scenario {
  int version = kScenarioVersion;
  std::uint64_t seed = 0;
  ProblemSource problem;
  InitSpec init;
  DisturbanceSpec disturbance;
  IntegratorConfig integrator;
  std::vector<OutputRequest> outputs;
};

/// Parses scenario text. Missing "seed" falls back to `default_seed`; a
/// disturbance without its own seed gets one derived from the scenario seed.
/// Throws ConfigError naming the field, or the line and column of a syntax
/// error.
Scenario ParseScenario(const std::string& text, std::uint64_t default_seed = 0);

/// Reads and parses a file; a file that cannot be opened is a ConfigError
/// naming the path.
Scenario LoadScenarioFile(const std::string& path,
                          std::uint64_t default_seed = 0);

Json ScenarioToJson(const Scenario& s);

/// Builds the problem, reading the dataset (relative to `base_dir`) when
/// the scenario references one.
ProblemSpec ResolveProblem(const Scenario& s, const std::string& base_dir = "");

/// Builds the initial state; seeded-random draws come from the "init"
/// sub-stream of the scenario seed.
ParamState ResolveInit(const Scenario& s, const ProblemSpec& spec);

/// Joins `path` onto `base_dir` unless it is absolute.
std::string ResolvePath(const std::string& base_dir, const std::string& path);

struct SimulationSummary {
  double final_time = 0.0;
  double final_loss = 0.0;
  FlowOutcome outcome = FlowOutcome::kNotConverged;
  std::optional<double> converged_at;
  int dissipation_violations = 0;
  std::size_t recorded_steps = 0;
};

SimulationSummary Summarize(const Trajectory& traj);
Json SummaryToJson(const SimulationSummary& s);

}  // namespace issgf
