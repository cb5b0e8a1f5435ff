#pragma once

#include "stlgp/falsifier.hpp"
#include "stlgp/models.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stlgp {

inline constexpr int kSchemaVersion = 1;

/// One experiment file. See configs/README.md for the schema.
struct ExperimentConfig {
  std::string name;
  /// Built-in model name; empty when `external` is set.
  std::string model;
  std::optional<SubprocessSimulator::Options> external;
  std::string formula;
  InputSpec inputs;
  FalsifierConfig falsifier;
  int repetitions = 1;
  std::uint64_t seed = 0;
};

/// Throws ValidationError whose message starts with the offending field path,
/// e.g. "budgets.ce: must be at least 1".
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& file);

SimulatorPtr make_model(const ExperimentConfig& config);

struct RunResult {
  int run = 0;
  std::uint64_t seed = 0;
  /// Empty when the run completed.
  std::string error;
  std::optional<FalsificationReport> report;
  double wall_seconds = 0.0;
};

/// One falsification with the given seed. Errors are caught into `error`.
RunResult run_once(const ExperimentConfig& config, const Simulator& model, int run, std::uint64_t seed);

/// Runs r = 0..repetitions-1 with seeds base + r on up to `jobs` threads.
/// Results are ordered by run index.
std::vector<RunResult> run_campaign(const ExperimentConfig& config, int repetitions, int jobs = 1);

struct CampaignStats {
  int runs = 0;
  int falsifying = 0;
  int failed = 0;
  double falsified_fraction = 0.0;
  /// Over falsifying runs.
  double nval_mean = 0.0;
  double nval_std = 0.0;
  /// Fewer than two falsifying runs, so nval_std is reported as 0.
  bool std_degenerate = false;
  double wall_mean = 0.0;
  double wall_std = 0.0;
};

CampaignStats summarize(const std::vector<RunResult>& runs);

nlohmann::json report_to_json(const ExperimentConfig& config, const RunResult& run);
/// Wall-time fields live under the "timing" key so the rest is reproducible.
nlohmann::json stats_to_json(const ExperimentConfig& config, const std::vector<RunResult>& runs,
                             const CampaignStats& stats);

/// Writes run-<r>/report.json and one trace CSV per counterexample.
void write_run(const std::filesystem::path& experiment_dir, const ExperimentConfig& config, const RunResult& run);

} // namespace stlgp
