#include "stlgp/experiment.hpp"
#include "stlgp/errors.hpp"
#include "stlgp/parser.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

namespace stlgp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ValidationError(path + ": " + message);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(path.empty() ? "(root)" : path, "must be an object");
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) fail(join(path, k), "unknown field");
  }
}

const json* field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& obj, const std::string& path, const char* key, double fallback) {
  const json* v = field(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) fail(join(path, key), "must be a number");
  return v->get<double>();
}

int integer(const json& obj, const std::string& path, const char* key, int fallback) {
  const json* v = field(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) fail(join(path, key), "must be an integer");
  return v->get<int>();
}

bool boolean(const json& obj, const std::string& path, const char* key, bool fallback) {
  const json* v = field(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(join(path, key), "must be true or false");
  return v->get<bool>();
}

std::string text(const json& obj, const std::string& path, const char* key, std::optional<std::string> fallback) {
  const json* v = field(obj, key);
  if (!v) {
    if (!fallback) fail(join(path, key), "is required");
    return *fallback;
  }
  if (!v->is_string()) fail(join(path, key), "must be a string");
  return v->get<std::string>();
}

std::vector<std::string> names(const json& obj, const std::string& path, const char* key) {
  const json* v = field(obj, key);
  if (!v) fail(join(path, key), "is required");
  if (!v->is_array() || v->empty()) fail(join(path, key), "must be a non-empty array of names");
  std::vector<std::string> out;
  for (const auto& e : *v) {
    if (!e.is_string()) fail(join(path, key), "must contain strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

void at_least(int value, int lo, const std::string& path) {
  if (value < lo) fail(path, "must be at least " + std::to_string(lo));
}

SubprocessSimulator::Options parse_external(const json& m, const std::string& path) {
  only_keys(m, path, {"command", "states", "inputs", "initial_state_dimension", "horizon", "step", "name"});
  SubprocessSimulator::Options o;
  o.command = text(m, path, "command", std::nullopt);
  if (o.command.empty()) fail(join(path, "command"), "must not be empty");
  o.state_names = names(m, path, "states");
  o.input_names = names(m, path, "inputs");
  const int q = integer(m, path, "initial_state_dimension", 0);
  at_least(q, 0, join(path, "initial_state_dimension"));
  o.initial_state_dimension = static_cast<std::size_t>(q);
  o.horizon = number(m, path, "horizon", 1.0);
  o.step = number(m, path, "step", 0.01);
  if (!(o.horizon > 0.0)) fail(join(path, "horizon"), "must be positive");
  if (!(o.step > 0.0)) fail(join(path, "step"), "must be positive");
  o.name = text(m, path, "name", std::string("subprocess"));
  return o;
}

Interpolation parse_interpolation(const std::string& s, const std::string& path) {
  if (s == "constant" || s == "pwc") return Interpolation::PiecewiseConstant;
  if (s == "linear" || s == "pwl") return Interpolation::PiecewiseLinear;
  fail(path, "must be \"constant\" or \"linear\"");
}

json counts_json(const Counts& n) { return json(n); }

} // namespace

ExperimentConfig parse_config(const json& doc) {
  only_keys(doc, "", {"schema_version", "name", "model", "formula", "inputs", "initial_state", "horizon", "step",
                      "parameterization", "initial_counts", "mode", "budgets", "gp", "keep_on_improvement",
                      "carry_knowledge", "repetitions", "seed"});
  const json* version = field(doc, "schema_version");
  if (!version) fail("schema_version", "is required");
  if (!version->is_number_integer() || version->get<int>() != kSchemaVersion) {
    fail("schema_version", "must be " + std::to_string(kSchemaVersion));
  }

  ExperimentConfig c;
  c.name = text(doc, "", "name", std::string("experiment"));
  if (c.name.empty() || c.name.find('/') != std::string::npos) fail("name", "must be a non-empty file name");

  const json* model = field(doc, "model");
  if (!model) fail("model", "is required");
  SimulatorPtr sim;
  if (model->is_string()) {
    c.model = model->get<std::string>();
    try {
      sim = make_simulator(c.model);
    } catch (const ValidationError& e) {
      fail("model", e.what());
    }
  } else {
    c.external = parse_external(*model, "model");
    sim = std::make_shared<SubprocessSimulator>(*c.external);
  }

  c.formula = text(doc, "", "formula", std::nullopt);

  c.inputs = sim->default_input_spec();
  if (const json* in = field(doc, "inputs")) {
    if (!in->is_array()) fail("inputs", "must be an array");
    if (in->size() != sim->input_count()) {
      fail("inputs", "model '" + sim->name() + "' takes " + std::to_string(sim->input_count()) + " input channels");
    }
    c.inputs.channels.clear();
    for (std::size_t k = 0; k < in->size(); ++k) {
      const std::string p = "inputs[" + std::to_string(k) + "]";
      const json& ch = (*in)[k];
      only_keys(ch, p, {"name", "min", "max", "interpolation"});
      ChannelSpec spec;
      spec.name = text(ch, p, "name", sim->input_names()[k]);
      spec.lo = number(ch, p, "min", 0.0);
      spec.hi = number(ch, p, "max", 1.0);
      if (!(spec.lo < spec.hi)) fail(p, "needs min < max");
      spec.interpolation = parse_interpolation(text(ch, p, "interpolation", std::string("constant")),
                                               join(p, "interpolation"));
      c.inputs.channels.push_back(spec);
    }
  }
  if (const json* x0 = field(doc, "initial_state")) {
    if (!x0->is_array()) fail("initial_state", "must be an array");
    if (!x0->empty() && x0->size() != sim->initial_state_dimension()) {
      fail("initial_state", "model '" + sim->name() + "' has an initial state of size " +
                                std::to_string(sim->initial_state_dimension()));
    }
    for (std::size_t s = 0; s < x0->size(); ++s) {
      const std::string p = "initial_state[" + std::to_string(s) + "]";
      const json& e = (*x0)[s];
      only_keys(e, p, {"name", "min", "max"});
      StateRange r;
      r.name = text(e, p, "name", sim->state_names().at(s));
      r.lo = number(e, p, "min", 0.0);
      r.hi = number(e, p, "max", r.lo);
      if (!(r.lo <= r.hi)) fail(p, "needs min <= max");
      c.inputs.initial_state.push_back(r);
    }
  }
  c.inputs.horizon = number(doc, "", "horizon", sim->default_horizon());
  if (!(c.inputs.horizon > 0.0)) fail("horizon", "must be positive");

  FalsifierConfig& f = c.falsifier;
  f.step = number(doc, "", "step", 0.0);
  if (f.step < 0.0) fail("step", "must be positive");
  const std::string param = text(doc, "", "parameterization", std::string("adaptive"));
  if (param == "adaptive") f.parameterization = ParamMode::Adaptive;
  else if (param == "fixed") f.parameterization = ParamMode::Fixed;
  else fail("parameterization", "must be \"adaptive\" or \"fixed\"");
  if (const json* n = field(doc, "initial_counts")) {
    if (!n->is_array() || n->size() != c.inputs.channels.size()) {
      fail("initial_counts", "must list one count per input channel");
    }
    Counts counts;
    for (const auto& e : *n) {
      if (!e.is_number_integer() || e.get<int>() < 0) fail("initial_counts", "must contain non-negative integers");
      counts.push_back(e.get<int>());
    }
    f.initial_counts = counts;
  }
  try {
    f.mode = parse_mode(text(doc, "", "mode", std::string("plain")));
  } catch (const ValidationError& e) {
    fail("mode", e.what());
  }

  if (const json* b = field(doc, "budgets")) {
    only_keys(*b, "budgets", {"mgi", "mii", "ce", "m", "n_init"});
    f.mgi = integer(*b, "budgets", "mgi", f.mgi);
    f.mii = integer(*b, "budgets", "mii", f.mii);
    f.ce = integer(*b, "budgets", "ce", f.ce);
    f.m = integer(*b, "budgets", "m", f.m);
    f.n_init = integer(*b, "budgets", "n_init", f.n_init);
  }
  at_least(f.mgi, 1, "budgets.mgi");
  at_least(f.mii, 0, "budgets.mii");
  at_least(f.ce, 1, "budgets.ce");
  at_least(f.m, 1, "budgets.m");
  at_least(f.n_init, 0, "budgets.n_init");

  if (const json* g = field(doc, "gp")) {
    only_keys(*g, "gp", {"restarts", "evaluations", "warm_start"});
    f.gp.restarts = integer(*g, "gp", "restarts", f.gp.restarts);
    f.gp.evaluations = integer(*g, "gp", "evaluations", f.gp.evaluations);
    f.warm_start_gp = boolean(*g, "gp", "warm_start", f.warm_start_gp);
  }
  at_least(f.gp.restarts, 1, "gp.restarts");
  at_least(f.gp.evaluations, 1, "gp.evaluations");

  f.keep_on_improvement = boolean(doc, "", "keep_on_improvement", false);
  f.carry_knowledge = boolean(doc, "", "carry_knowledge", false);
  if (f.carry_knowledge && f.parameterization != ParamMode::Adaptive) {
    fail("carry_knowledge", "needs the adaptive parameterization");
  }

  c.repetitions = integer(doc, "", "repetitions", 1);
  at_least(c.repetitions, 1, "repetitions");
  const json* seed = field(doc, "seed");
  if (seed) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0)) {
      fail("seed", "must be a non-negative integer");
    }
    c.seed = seed->get<std::uint64_t>();
  }
  // surfaces ParseError for bad formulas before any simulation
  parse(c.formula);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError(file.string() + ": cannot open");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(file.string() + ": invalid JSON: " + e.what());
  }
  return parse_config(doc);
}

SimulatorPtr make_model(const ExperimentConfig& config) {
  if (config.external) return std::make_shared<SubprocessSimulator>(*config.external);
  return make_simulator(config.model);
}

RunResult run_once(const ExperimentConfig& config, const Simulator& model, int run, std::uint64_t seed) {
  RunResult r;
  r.run = run;
  r.seed = seed;
  try {
    const FormulaPtr phi = parse(config.formula);
    FalsifierConfig f = config.falsifier;
    f.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    r.report = falsify(model, phi, config.inputs, f);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

std::vector<RunResult> run_campaign(const ExperimentConfig& config, int repetitions, int jobs) {
  if (repetitions < 1) throw ValidationError("repetitions: must be at least 1");
  const SimulatorPtr model = make_model(config);
  std::vector<RunResult> results(static_cast<std::size_t>(repetitions));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < repetitions; r = next++) {
      results[static_cast<std::size_t>(r)] = run_once(config, *model, r, config.seed + static_cast<std::uint64_t>(r));
    }
  };
  const int threads = std::max(1, std::min(jobs, repetitions));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

CampaignStats summarize(const std::vector<RunResult>& runs) {
  CampaignStats s;
  s.runs = static_cast<int>(runs.size());
  std::vector<double> nval, wall;
  for (const auto& r : runs) {
    if (!r.error.empty()) {
      ++s.failed;
      continue;
    }
    wall.push_back(r.wall_seconds);
    if (r.report->falsified()) nval.push_back(r.report->total_simulations);
  }
  auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = sd = 0.0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return;
    for (double x : v) sd += (x - mean) * (x - mean);
    sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
  };
  s.falsifying = static_cast<int>(nval.size());
  s.falsified_fraction = s.runs ? static_cast<double>(s.falsifying) / s.runs : 0.0;
  mean_std(nval, s.nval_mean, s.nval_std);
  s.std_degenerate = nval.size() < 2;
  mean_std(wall, s.wall_mean, s.wall_std);
  return s;
}

json report_to_json(const ExperimentConfig& config, const RunResult& run) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = config.name;
  j["model"] = config.external ? config.external->name : config.model;
  j["formula"] = config.formula;
  j["mode"] = to_string(config.falsifier.mode);
  j["run"] = run.run;
  j["seed"] = run.seed;
  j["timing"] = {{"wall_seconds", run.wall_seconds}};
  if (!run.error.empty()) {
    j["error"] = run.error;
    return j;
  }
  const FalsificationReport& r = *run.report;
  j["falsified"] = r.falsified();
  j["total_simulations"] = r.total_simulations;
  j["verification_simulations"] = r.verification_simulations;
  j["stage_simulations"] = r.stage_simulations;
  j["d_history"] = r.d_history;
  j["fallback_iterations"] = r.fallback_iterations;
  j["n_history"] = json::array();
  for (const auto& n : r.n_history) j["n_history"].push_back(counts_json(n));
  j["counterexamples"] = json::array();
  for (std::size_t i = 0; i < r.counterexamples.size(); ++i) {
    const Counterexample& c = r.counterexamples[i];
    json cps = json::array();
    for (std::size_t k = 0; k < c.input.control_points.size(); ++k) {
      json channel = json::array();
      for (const auto& p : c.input.control_points[k]) channel.push_back({p.t, p.u});
      cps.push_back(channel);
    }
    j["counterexamples"].push_back({{"stage", c.stage},
                                     {"counts", counts_json(c.counts)},
                                     {"coords", c.coords},
                                     {"robustness", c.robustness},
                                     {"x0", c.input.x0},
                                     {"control_points", cps},
                                     {"trace", "cex-" + std::to_string(i) + ".csv"}});
  }
  return j;
}

json stats_to_json(const ExperimentConfig& config, const std::vector<RunResult>& runs, const CampaignStats& stats) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = config.name;
  j["model"] = config.external ? config.external->name : config.model;
  j["formula"] = config.formula;
  j["mode"] = to_string(config.falsifier.mode);
  j["base_seed"] = config.seed;
  j["repetitions"] = stats.runs;
  j["falsifying"] = stats.falsifying;
  j["failed"] = stats.failed;
  j["falsified_fraction"] = stats.falsified_fraction;
  j["nval"] = {{"mean", stats.nval_mean}, {"std", stats.nval_std}, {"std_degenerate", stats.std_degenerate}};
  json per_run = json::array(), wall = json::array();
  for (const auto& r : runs) {
    json e = {{"run", r.run}, {"seed", r.seed}};
    if (r.error.empty()) {
      e["falsified"] = r.report->falsified();
      e["nval"] = r.report->total_simulations;
      e["stages"] = r.report->n_history.size();
    } else {
      e["error"] = r.error;
    }
    per_run.push_back(e);
    wall.push_back(r.wall_seconds);
  }
  j["runs"] = per_run;
  j["timing"] = {{"wall_mean", stats.wall_mean}, {"wall_std", stats.wall_std}, {"wall_seconds", wall}};
  return j;
}

void write_run(const std::filesystem::path& experiment_dir, const ExperimentConfig& config, const RunResult& run) {
  const auto dir = experiment_dir / ("run-" + std::to_string(run.run));
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "report.json") << report_to_json(config, run).dump(2) << "\n";
  if (!run.report) return;
  for (std::size_t i = 0; i < run.report->counterexamples.size(); ++i) {
    std::ofstream out(dir / ("cex-" + std::to_string(i) + ".csv"));
    out.precision(17);
    write_trace_csv(out, run.report->counterexamples[i].trace);
  }
}

} // namespace stlgp
