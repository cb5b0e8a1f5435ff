#include "doctest.h"

#include "stlgp/errors.hpp"
#include "stlgp/experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

using namespace stlgp;
using nlohmann::json;

namespace {

json toy_doc() {
  return json::parse(R"json({
    "schema_version": 1,
    "name": "toy",
    "model": "toy",
    "formula": "not (G[0,0.51](0 < x < 0.2) and G[0.55,1](0.8 < x < 1))",
    "mode": "pas",
    "budgets": {"mgi": 3, "mii": 60, "ce": 1, "m": 500},
    "gp": {"restarts": 2, "evaluations": 60},
    "seed": 1
  })json");
}

std::string validation_message(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("stlgp-test-" + std::to_string(::getpid())) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int cli(const std::string& args) {
  const int status = std::system((std::string(STLGP_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(toy_doc());
  CHECK(c.model == "toy");
  CHECK(c.falsifier.mode == FalsifierMode::Pas);
  CHECK(c.falsifier.mgi == 3);
  CHECK(c.falsifier.gp.restarts == 2);
  CHECK(c.inputs.channels.size() == 1);
  CHECK(c.inputs.horizon == 1.0);
  CHECK(c.repetitions == 1);
  CHECK(c.seed == 1);

  json at = toy_doc();
  at["model"] = "transmission";
  at["formula"] = "G[0,30](v <= 120)";
  at["inputs"] = json::parse(R"([{"name": "throttle", "min": 0, "max": 100, "interpolation": "linear"},
                                 {"name": "brake", "min": 0, "max": 50}])");
  at["initial_counts"] = {2, 0};
  const ExperimentConfig t = parse_config(at);
  CHECK(t.inputs.channels[0].interpolation == Interpolation::PiecewiseLinear);
  CHECK(t.inputs.channels[1].hi == 50.0);
  CHECK(t.inputs.horizon == 30.0);
  CHECK(*t.falsifier.initial_counts == Counts{2, 0});
}

TEST_CASE("config errors name the field") {
  json doc = toy_doc();
  doc["budgets"]["ce"] = 0;
  CHECK(validation_message(doc) == "budgets.ce: must be at least 1");

  doc = toy_doc();
  doc.erase("schema_version");
  CHECK(validation_message(doc).rfind("schema_version:", 0) == 0);
  doc["schema_version"] = 7;
  CHECK(validation_message(doc).rfind("schema_version:", 0) == 0);

  doc = toy_doc();
  doc["budgets"]["mii"] = "lots";
  CHECK(validation_message(doc) == "budgets.mii: must be an integer");

  doc = toy_doc();
  doc["gp"]["restart"] = 3;
  CHECK(validation_message(doc) == "gp.restart: unknown field");

  doc = toy_doc();
  doc["model"] = "simulink";
  CHECK(validation_message(doc).rfind("model:", 0) == 0);

  doc = toy_doc();
  doc["inputs"] = json::parse(R"([{"min": 1, "max": 0}])");
  CHECK(validation_message(doc).rfind("inputs[0]:", 0) == 0);

  doc = toy_doc();
  doc["mode"] = "greedy";
  CHECK(validation_message(doc).rfind("mode:", 0) == 0);

  doc = toy_doc();
  doc["repetitions"] = 0;
  CHECK(validation_message(doc) == "repetitions: must be at least 1");

  doc = toy_doc();
  doc["model"] = json::parse(R"({"command": "cat", "states": []})");
  CHECK(validation_message(doc).rfind("model.states:", 0) == 0);

  doc = toy_doc();
  doc["formula"] = "G[0,1](x <";
  CHECK_THROWS_AS(parse_config(doc), ParseError);
}

TEST_CASE("single runs and the output layout") {
  const ExperimentConfig c = parse_config(toy_doc());
  const auto model = make_model(c);
  const RunResult r = run_once(c, *model, 0, c.seed);
  REQUIRE(r.error.empty());
  REQUIRE(r.report->falsified());

  const auto dir = scratch("layout");
  write_run(dir, c, r);
  std::ifstream in(dir / "run-0" / "report.json");
  const json report = json::parse(in);
  CHECK(report["schema_version"] == kSchemaVersion);
  CHECK(report["total_simulations"] == r.report->total_simulations);
  REQUIRE(report["counterexamples"].size() == r.report->counterexamples.size());
  for (std::size_t i = 0; i < r.report->counterexamples.size(); ++i) {
    std::ifstream csv(dir / "run-0" / report["counterexamples"][i]["trace"].get<std::string>());
    const Trace t = read_trace_csv(csv, 1);
    CHECK(t.grid().size() == r.report->counterexamples[i].trace.grid().size());
  }

  json broken = toy_doc();
  broken["model"] = json::parse(R"({"command": "sh -c 'echo no license >&2; exit 3'", "states": ["x"], "inputs": ["u"]})");
  const ExperimentConfig b = parse_config(broken);
  const RunResult failed = run_once(b, *make_model(b), 0, 1);
  CHECK(failed.error.find("no license") != std::string::npos);
  CHECK(!failed.report);
}

TEST_CASE("campaign statistics") {
  json doc = toy_doc();
  doc["model"] = "analytic-pair";
  doc["formula"] = "r1 > 0 and r2 > 0";
  doc["budgets"] = json::parse(R"({"mgi": 1, "mii": 200, "m": 300})");
  const ExperimentConfig c = parse_config(doc);

  const auto runs = run_campaign(c, 6, 1);
  const auto again = run_campaign(c, 6, 3);
  REQUIRE(runs.size() == 6);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    CHECK(runs[r].run == static_cast<int>(r));
    CHECK(runs[r].seed == c.seed + r);
  }
  const CampaignStats s = summarize(runs);
  json a = stats_to_json(c, runs, s), b = stats_to_json(c, again, summarize(again));
  a.erase("timing");
  b.erase("timing");
  CHECK(a.dump() == b.dump());

  double sum = 0.0;
  int falsifying = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    CHECK(a["runs"][r]["nval"] == runs[r].report->total_simulations);
    if (runs[r].report->falsified()) {
      sum += runs[r].report->total_simulations;
      ++falsifying;
    }
  }
  CHECK(s.falsifying == falsifying);
  CHECK(s.nval_mean == doctest::Approx(sum / falsifying));
  CHECK(!s.std_degenerate);

  const CampaignStats one = summarize(run_campaign(c, 1));
  CHECK(one.std_degenerate);
  CHECK(one.nval_std == 0.0);

  std::vector<RunResult> mixed = {runs[0], RunResult{1, 2, "boom", std::nullopt, 0.0}};
  const CampaignStats m = summarize(mixed);
  CHECK(m.failed == 1);
  CHECK(m.runs == 2);
  CHECK(m.std_degenerate);
}

TEST_CASE("command line") {
  const auto dir = scratch("cli");
  const auto config = dir / "toy.json";
  std::ofstream(config) << toy_doc().dump();
  CHECK(cli("falsify --config " + config.string() + " --out " + dir.string()) == 0);
  CHECK(std::filesystem::exists(dir / "toy" / "run-0" / "report.json"));

  json bad = toy_doc();
  bad["budgets"]["ce"] = 0;
  std::ofstream(dir / "bad.json") << bad.dump();
  CHECK(cli("falsify --config " + (dir / "bad.json").string() + " --out " + dir.string()) == 2);
  bad = toy_doc();
  bad["formula"] = "G[0,1](x <";
  std::ofstream(dir / "unparsable.json") << bad.dump();
  CHECK(cli("falsify --config " + (dir / "unparsable.json").string() + " --out " + dir.string()) == 2);

  std::ifstream in(dir / "toy" / "run-0" / "report.json");
  const json report = json::parse(in);
  const auto trace = (dir / "toy" / "run-0" / report["counterexamples"][0]["trace"].get<std::string>()).string();
  CHECK(cli("monitor --formula \"G[0,1](x >= 0)\" --trace " + trace + " --inputs 1") == 0);
  CHECK(cli("monitor --formula \"" + toy_doc()["formula"].get<std::string>() + "\" --trace " + trace +
            " --inputs 1") == 1);
  CHECK(cli("monitor --formula \"G[0,1](x <\" --trace " + trace) == 2);
  CHECK(cli("monitor --formula \"G[0,1](y > 0)\" --trace " + trace) == 2);

  CHECK(cli("benchmark --config " + config.string() + " --reps 2 --out " + (dir / "bench").string()) == 0);
  std::ifstream stats_in(dir / "bench" / "toy" / "stats.json");
  const json stats = json::parse(stats_in);
  CHECK(stats["repetitions"] == 2);
  CHECK(stats.contains("timing"));
  std::filesystem::remove_all(dir.parent_path());
}
