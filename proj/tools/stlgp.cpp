#include "stlgp/errors.hpp"
#include "stlgp/experiment.hpp"
#include "stlgp/monitor.hpp"
#include "stlgp/parser.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace stlgp;

namespace {

// 0 ok, 1 requirement holds (monitor: robustness not positive), 2 usage or input error
constexpr int kError = 2;

std::filesystem::path output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("STLGP_OUT"); env && *env) return env;
  return "results";
}

void apply_overrides(ExperimentConfig& config, const std::string& mode, std::optional<std::uint64_t> seed) {
  if (!mode.empty()) config.falsifier.mode = parse_mode(mode);
  if (seed) config.seed = *seed;
}

int cmd_falsify(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out,
                const std::string& mode) {
  ExperimentConfig config = load_config(config_path);
  apply_overrides(config, mode, seed);
  const SimulatorPtr model = make_model(config);
  const RunResult run = run_once(config, *model, 0, config.seed);
  const auto dir = output_root(out) / config.name;
  write_run(dir, config, run);
  if (!run.error.empty()) {
    std::cerr << "error: " << run.error << "\n";
    return kError;
  }
  const auto& r = *run.report;
  std::cout << (r.falsified() ? "falsified" : "not falsified") << " after " << r.total_simulations
            << " simulations in " << r.n_history.size() << " stage(s)\n";
  std::cout << "report: " << (dir / "run-0" / "report.json").string() << "\n";
  return 0;
}

int cmd_benchmark(const std::string& config_path, std::optional<int> reps, int jobs, std::optional<std::uint64_t> seed,
                  const std::string& out, const std::string& mode) {
  ExperimentConfig config = load_config(config_path);
  apply_overrides(config, mode, seed);
  const int repetitions = reps ? *reps : config.repetitions;
  if (repetitions < 1) throw ValidationError("--reps: must be at least 1");
  const auto runs = run_campaign(config, repetitions, jobs);
  const CampaignStats stats = summarize(runs);
  const auto dir = output_root(out) / config.name;
  for (const auto& r : runs) write_run(dir, config, r);
  std::ofstream(dir / "stats.json") << stats_to_json(config, runs, stats).dump(2) << "\n";
  for (const auto& r : runs) {
    if (!r.error.empty()) std::cerr << "run " << r.run << " failed: " << r.error << "\n";
  }
  std::cout << "f = " << stats.falsifying << "/" << stats.runs << ", nval = " << stats.nval_mean << " +- "
            << stats.nval_std << (stats.std_degenerate ? " (fewer than 2 falsifying runs)" : "")
            << ", wall = " << stats.wall_mean << " s per run\n";
  std::cout << "stats: " << (dir / "stats.json").string() << "\n";
  return 0;
}

int cmd_monitor(const std::string& formula, const std::string& trace_path, std::size_t inputs) {
  const FormulaPtr phi = parse(formula);
  std::ifstream in(trace_path);
  if (!in) throw ValidationError(trace_path + ": cannot open");
  const Trace trace = read_trace_csv(in, inputs);
  const double rho = robustness(*phi, trace);
  std::cout.precision(17);
  std::cout << rho << "\n";
  return rho > 0.0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Falsification of signal temporal logic requirements with Gaussian-process active learning"};
  app.require_subcommand(1);

  std::string config_path, out, mode, formula, trace_path;
  std::uint64_t seed_value = 0;
  int reps_value = 0, jobs = 1;
  std::size_t inputs = 0;

  auto* falsify_cmd = app.add_subcommand("falsify", "Run one falsification");
  falsify_cmd->add_option("--config", config_path, "Experiment JSON file")->required()->check(CLI::ExistingFile);
  auto* falsify_seed = falsify_cmd->add_option("--seed", seed_value, "Seed, replaces the config's seed");
  falsify_cmd->add_option("--out", out, "Output directory (default $STLGP_OUT or ./results)");
  falsify_cmd->add_option("--mode", mode, "plain, pas or conditional")
      ->check(CLI::IsMember({"plain", "pas", "conditional"}));

  auto* bench_cmd = app.add_subcommand("benchmark", "Run repeated seeded falsifications and aggregate them");
  bench_cmd->add_option("--config", config_path, "Experiment JSON file")->required()->check(CLI::ExistingFile);
  auto* bench_reps = bench_cmd->add_option("--reps", reps_value, "Repetitions, replaces the config's value");
  bench_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* bench_seed = bench_cmd->add_option("--seed", seed_value, "Base seed; run r uses seed + r");
  bench_cmd->add_option("--out", out, "Output directory (default $STLGP_OUT or ./results)");
  bench_cmd->add_option("--mode", mode, "plain, pas or conditional")
      ->check(CLI::IsMember({"plain", "pas", "conditional"}));

  auto* monitor_cmd = app.add_subcommand("monitor", "Robustness of a stored trace");
  monitor_cmd->add_option("--formula", formula, "STL formula")->required();
  monitor_cmd->add_option("--trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);
  monitor_cmd->add_option("--inputs", inputs, "Number of trailing input columns in the CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }

  try {
    if (*falsify_cmd) {
      std::optional<std::uint64_t> seed;
      if (*falsify_seed) seed = seed_value;
      return cmd_falsify(config_path, seed, out, mode);
    }
    if (*bench_cmd) {
      std::optional<std::uint64_t> seed;
      if (*bench_seed) seed = seed_value;
      std::optional<int> reps;
      if (*bench_reps) reps = reps_value;
      return cmd_benchmark(config_path, reps, jobs, seed, out, mode);
    }
    return cmd_monitor(formula, trace_path, inputs);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kError;
}
