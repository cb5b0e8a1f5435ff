#include "doctest.h"

#include "stlgp/errors.hpp"
#include "stlgp/falsifier.hpp"
#include "stlgp/monitor.hpp"
#include "stlgp/parser.hpp"

#include <cmath>
#include <limits>

using namespace stlgp;

namespace {

const char* kToyRequirement = "not (G[0,0.51](0 < x < 0.2) and G[0.55,1](0.8 < x < 1))";

FalsifierConfig toy_config(std::uint64_t seed, FalsifierMode mode = FalsifierMode::Pas) {
  FalsifierConfig c;
  c.mgi = 3;
  c.mii = 60;
  c.m = 500;
  c.mode = mode;
  c.seed = seed;
  c.gp.restarts = 2;
  c.gp.evaluations = 60;
  return c;
}

/// A value change of the decoded toy input inside [0.51, 0.55).
bool has_witness_transition(const Counterexample& c) {
  const auto& cps = c.input.control_points[0];
  for (std::size_t i = 1; i < cps.size(); ++i) {
    if (cps[i].t >= 0.51 && cps[i].t < 0.55 && cps[i].u != cps[i - 1].u) return true;
  }
  return false;
}

void check_report_shape(const FalsificationReport& r, std::size_t channels) {
  REQUIRE(r.n_history.size() == r.d_history.size());
  REQUIRE(r.n_history.size() == r.stage_simulations.size());
  int total = 0;
  for (int s : r.stage_simulations) total += s;
  CHECK(total == r.total_simulations);
  for (std::size_t i = 0; i < r.n_history.size(); ++i) {
    REQUIRE(r.n_history[i].size() == channels);
    if (i == 0) continue;
    int grown = 0;
    for (std::size_t k = 0; k < channels; ++k) {
      REQUIRE(r.n_history[i][k] >= r.n_history[i - 1][k]);
      grown += r.n_history[i][k] - r.n_history[i - 1][k];
    }
    CHECK(grown == 1);
  }
  for (const auto& c : r.counterexamples) CHECK(c.robustness < 0.0);
}

} // namespace

TEST_CASE("select_channel") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(select_channel(0, inf, 3.0, 2) == 1);
  CHECK(select_channel(1, inf, 3.0, 2) == 0);
  CHECK(select_channel(0, 2.0, 5.0, 2) == 0);
  CHECK(select_channel(1, 2.0, 2.0, 3) == 2);
  for (double d : {0.0, 1.0, 7.0}) CHECK(select_channel(0, 1.0, d, 1) == 0);
  CHECK(select_channel(0, 5.0, 2.0, 2, true) == 0);
  CHECK(select_channel(0, 2.0, 5.0, 2, true) == 1);
  CHECK_THROWS_AS(select_channel(0, 1.0, 1.0, 0), ValidationError);
}

TEST_CASE("conditional antecedent") {
  const auto a = conditional_antecedent(*parse("G[0,30](w <= 3000 -> v <= 100)"));
  CHECK(structurally_equal(*a, *parse("G[0,30](w <= 3000)")));
  const auto b = conditional_antecedent(*parse("G[0,30](w <= 3000) -> G[0,10](v <= 100)"));
  CHECK(structurally_equal(*b, *parse("G[0,30](w <= 3000)")));
  CHECK_THROWS_AS(conditional_antecedent(*parse("G[0,30](v <= 100)")), ValidationError);
}

TEST_CASE("toy model falsification") {
  ToySimulator toy;
  const auto phi = parse(kToyRequirement);
  const InputSpec spec = toy.default_input_spec();
  int falsified = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    int observed = 0;
    const auto r = falsify(toy, phi, spec, toy_config(seed), [&](const SimulationEvent&) { ++observed; });
    check_report_shape(r, 1);
    CHECK(observed == r.total_simulations);
    if (!r.falsified()) continue;
    ++falsified;
    CHECK(r.n_history.back()[0] <= 2);
    CHECK(r.verification_simulations == static_cast<int>(r.counterexamples.size()));
    for (const auto& c : r.counterexamples) {
      CHECK(has_witness_transition(c));
      CHECK(robustness(*phi, c.trace) == c.robustness);
    }
    // with ce = 1 the run stops at the first stage that finds something
    for (std::size_t i = 0; i + 1 < r.d_history.size(); ++i) CHECK(r.d_history[i] > 0.0);
    CHECK(r.d_history.back() == 0.0);
  }
  CHECK(falsified >= 5);
}

TEST_CASE("plain and conditional modes on the toy model") {
  ToySimulator toy;
  const auto phi = parse(kToyRequirement);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = falsify(toy, phi, toy.default_input_spec(), toy_config(seed, FalsifierMode::Plain));
    check_report_shape(r, 1);
    for (const auto& c : r.counterexamples) CHECK(has_witness_transition(c));
  }

  CHECK_THROWS_AS(falsify(toy, phi, toy.default_input_spec(), toy_config(1, FalsifierMode::Conditional)),
                  ValidationError);
  const auto cond = parse("G[0,1](x > 0.5 -> x < 0.9)");
  const auto r = falsify(toy, cond, toy.default_input_spec(), toy_config(2, FalsifierMode::Conditional));
  REQUIRE(r.falsified());
  const Trace& t = r.counterexamples[0].trace;
  double peak = 0.0;
  for (std::size_t i = 0; i < t.grid().size(); ++i) peak = std::max(peak, t.value(0, i));
  CHECK(peak >= 0.9);
}

TEST_CASE("unfalsifiable property uses the full budget") {
  ToySimulator toy;
  auto cfg = toy_config(4);
  cfg.mii = 10;
  const auto r = falsify(toy, parse("G[0,1](x >= -1)"), toy.default_input_spec(), cfg);
  CHECK(!r.falsified());
  REQUIRE(r.d_history.size() == 3);
  int expected = 0;
  for (int n = 0; n < 3; ++n) expected += static_cast<int>(default_initial_points(2 * n + 1)) + cfg.mii;
  CHECK(r.total_simulations == expected);
  for (double d : r.d_history) CHECK(d > 0.0);
  CHECK(r.n_history.back() == Counts{2});
}

TEST_CASE("same seed, same report") {
  ToySimulator toy;
  const auto phi = parse(kToyRequirement);
  std::vector<Point> a, b;
  falsify(toy, phi, toy.default_input_spec(), toy_config(6), [&](const SimulationEvent& e) { a.push_back(e.coords); });
  falsify(toy, phi, toy.default_input_spec(), toy_config(6), [&](const SimulationEvent& e) { b.push_back(e.coords); });
  CHECK(a == b);
}

TEST_CASE("carrying knowledge across stages") {
  ToySimulator toy;
  auto cfg = toy_config(3);
  cfg.carry_knowledge = true;
  const auto r = falsify(toy, parse(kToyRequirement), toy.default_input_spec(), cfg);
  check_report_shape(r, 1);
  for (const auto& c : r.counterexamples) CHECK(has_witness_transition(c));
  cfg.parameterization = ParamMode::Fixed;
  CHECK_THROWS_AS(falsify(toy, parse(kToyRequirement), toy.default_input_spec(), cfg), ValidationError);
}

TEST_CASE("two channels rotate and grow one at a time") {
  TransmissionSimulator at;
  FalsifierConfig cfg = toy_config(5);
  cfg.mgi = 4;
  cfg.mii = 5;
  const auto r = falsify(at, parse("G[0,30](v <= 400)"), at.default_input_spec(), cfg);
  CHECK(!r.falsified());
  check_report_shape(r, 2);
  // first stage always rotates
  CHECK(r.n_history[1] == Counts{0, 1});
}

TEST_CASE("configuration and model errors") {
  ToySimulator toy;
  const auto phi = parse(kToyRequirement);
  auto cfg = toy_config(1);
  cfg.ce = 0;
  CHECK_THROWS_AS(falsify(toy, phi, toy.default_input_spec(), cfg), ValidationError);
  CHECK_THROWS_AS(falsify(toy, parse("G[0,2](x > 0)"), toy.default_input_spec(), toy_config(1)), HorizonError);
  CHECK_THROWS_AS(falsify(toy, phi, TransmissionSimulator().default_input_spec(), toy_config(1)), ValidationError);

  SubprocessSimulator::Options o;
  o.command = "sh -c 'echo solver blew up >&2; exit 1'";
  o.state_names = {"x"};
  o.input_names = {"u"};
  SubprocessSimulator broken(o);
  try {
    falsify(broken, phi, toy.default_input_spec(), toy_config(1));
    FAIL("no error");
  } catch (const EvaluationError& e) {
    CHECK(e.point().size() == 1);
    CHECK(std::string(e.what()).find("solver blew up") != std::string::npos);
  }
}
