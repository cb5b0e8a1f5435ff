#pragma once

#include "stlgp/formula.hpp"
#include "stlgp/gp.hpp"
#include "stlgp/models.hpp"
#include "stlgp/parameterization.hpp"
#include "stlgp/sampler.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stlgp {

enum class FalsifierMode {
  /// One GP on the robustness of the requirement.
  Plain,
  /// One GP per atom of the negated requirement, weighted through its skeleton.
  Pas,
  /// Requirement of the form `A -> B` or `G_I(c -> s)`; sampling favours
  /// inputs that satisfy the antecedent.
  Conditional,
};

std::string to_string(FalsifierMode mode);
FalsifierMode parse_mode(const std::string& text);

struct FalsifierConfig {
  /// Maximum number of stages, one domain-estimation call each.
  int mgi = 10;
  /// Iteration budget of each stage, on top of its initial design.
  int mii = 100;
  int ce = 1;
  int m = 500;
  /// Initial design size per stage; 0 selects max(5, 2 D).
  int n_init = 0;
  FalsifierMode mode = FalsifierMode::Plain;
  ParamMode parameterization = ParamMode::Adaptive;
  std::uint64_t seed = 0;
  GPFitOptions gp;
  bool warm_start_gp = true;
  /// Counts of the first stage; all zeros when unset.
  std::optional<Counts> initial_counts;
  /// Keep the grown channel when d improved instead of when it got worse.
  bool keep_on_improvement = false;
  /// Lift the previous stage's evaluations into the next stage with embed.
  /// Adaptive parameterization only.
  bool carry_knowledge = false;
  /// Simulation step; 0 uses the model default.
  double step = 0.0;

  void validate() const;
};

struct Counterexample {
  Point coords;
  Counts counts;
  int stage = 0;
  DecodedInput input;
  double robustness = 0.0;
  Trace trace;
};

struct FalsificationReport {
  std::vector<Counterexample> counterexamples;
  /// Minimum distance to the target returned by each stage.
  std::vector<double> d_history;
  /// Counts used by each stage.
  std::vector<Counts> n_history;
  /// Simulations run by each stage (initial design plus iterations).
  std::vector<int> stage_simulations;
  int total_simulations = 0;
  /// Extra simulations spent re-checking counterexamples; not part of the total.
  int verification_simulations = 0;
  std::vector<int> fallback_iterations;

  bool falsified() const { return !counterexamples.empty(); }
};

/// Called after every simulation the search runs.
struct SimulationEvent {
  int stage;
  const Counts& counts;
  const Point& coords;
  const Trace& trace;
  double robustness;
};
using SimulationObserver = std::function<void(const SimulationEvent&)>;

/// k if d_next > d_i, else (k + 1) mod channels. With keep_on_improvement
/// the comparison flips to d_next < d_i.
std::size_t select_channel(std::size_t k, double d_i, double d_next, std::size_t channels,
                           bool keep_on_improvement = false);

/// Antecedent of a conditional requirement: A for `A -> B`, G_I(c) for
/// G_I(c -> s). Throws ValidationError for any other shape.
FormulaPtr conditional_antecedent(const Formula& phi);

/// Adaptive falsification. Stage i runs domain estimation for robustness < 0
/// with counts n_i, then picks a channel with select_channel and grows it by
/// one control point. Stops once ce counterexamples are found or after mgi
/// stages. Every counterexample is re-simulated and must have robustness < 0.
/// A failing simulation raises EvaluationError carrying the search point.
FalsificationReport falsify(const Simulator& model, const FormulaPtr& phi, const InputSpec& spec,
                            const FalsifierConfig& config, const SimulationObserver& observer = {});

} // namespace stlgp
