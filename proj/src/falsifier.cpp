#include "stlgp/falsifier.hpp"
#include "stlgp/decomposition.hpp"
#include "stlgp/errors.hpp"
#include "stlgp/monitor.hpp"

#include <limits>

namespace stlgp {

std::string to_string(FalsifierMode mode) {
  switch (mode) {
  case FalsifierMode::Plain: return "plain";
  case FalsifierMode::Pas: return "pas";
  case FalsifierMode::Conditional: return "conditional";
  }
  return "?";
}

FalsifierMode parse_mode(const std::string& text) {
  if (text == "plain") return FalsifierMode::Plain;
  if (text == "pas") return FalsifierMode::Pas;
  if (text == "conditional") return FalsifierMode::Conditional;
  throw ValidationError("mode must be plain, pas or conditional, got '" + text + "'");
}

void FalsifierConfig::validate() const {
  if (mgi < 1) throw ValidationError("mgi must be at least 1");
  if (mii < 0) throw ValidationError("mii must be non-negative");
  if (ce < 1) throw ValidationError("ce must be at least 1");
  if (m < 1) throw ValidationError("m must be at least 1");
  if (n_init < 0) throw ValidationError("n_init must be non-negative");
  if (step < 0.0) throw ValidationError("step must be non-negative");
  if (carry_knowledge && parameterization != ParamMode::Adaptive) {
    throw ValidationError("carry_knowledge needs the adaptive parameterization");
  }
}

std::size_t select_channel(std::size_t k, double d_i, double d_next, std::size_t channels,
                           bool keep_on_improvement) {
  if (channels == 0) throw ValidationError("select_channel needs at least one channel");
  const bool keep = keep_on_improvement ? d_next < d_i : d_next > d_i;
  return keep ? k : (k + 1) % channels;
}

FormulaPtr conditional_antecedent(const Formula& phi) {
  // implications are stored as (not a) or b
  auto split = [](const Formula& f) -> FormulaPtr {
    if (f.op() == Formula::Op::Or && f.child(0)->op() == Formula::Op::Not) return f.child(0)->child();
    return nullptr;
  };
  if (auto a = split(phi)) return a;
  if (phi.op() == Formula::Op::Globally) {
    if (auto c = split(*phi.child())) return Formula::globally(phi.bounds(), c);
  }
  throw ValidationError("conditional mode needs a requirement of the form A -> B or G[a,b](c -> s), got " +
                        phi.to_string());
}

FalsificationReport falsify(const Simulator& model, const FormulaPtr& phi, const InputSpec& spec,
                            const FalsifierConfig& config, const SimulationObserver& observer) {
  config.validate();
  spec.validate();
  if (spec.channels.size() != model.input_count()) {
    throw ValidationError("input spec has " + std::to_string(spec.channels.size()) + " channels, model '" +
                          model.name() + "' takes " + std::to_string(model.input_count()));
  }
  if (!spec.initial_state.empty() && spec.initial_state.size() != model.initial_state_dimension()) {
    throw ValidationError("initial-state box has the wrong dimension for model '" + model.name() + "'");
  }
  const double T = spec.horizon;
  if (phi->horizon() > T + kTimeTolerance) {
    throw HorizonError("formula needs a horizon of " + std::to_string(phi->horizon()) + " but inputs end at " +
                       std::to_string(T));
  }
  const double h = config.step > 0.0 ? config.step : model.default_step();
  const TimeGrid grid = TimeGrid::uniform(T, h);
  const std::size_t channels = spec.channels.size();

  Decomposition dec;
  FormulaPtr antecedent;
  if (config.mode == FalsifierMode::Pas) dec = decompose(Formula::negation(phi));
  if (config.mode == FalsifierMode::Conditional) antecedent = conditional_antecedent(*phi);

  FalsificationReport report;
  Rng seeds(config.seed);
  Counts n = config.initial_counts ? *config.initial_counts : Counts(channels, 0);
  dimension(spec, config.parameterization, n);
  std::size_t k = 0;
  double d_prev = std::numeric_limits<double>::infinity();
  std::vector<KnowledgeEntry> carried;

  for (int stage = 0; stage < config.mgi && static_cast<int>(report.counterexamples.size()) < config.ce; ++stage) {
    const std::size_t dim = dimension(spec, config.parameterization, n);
    auto simulate = [&](const Point& x) {
      DecodedInput in = decode(spec, config.parameterization, n, x, grid);
      Trace trace = model.simulate(in.x0, in.input, T, h);
      return std::make_pair(std::move(in), std::move(trace));
    };
    auto observe = [&](const Point& x, const Trace& trace, double r) {
      if (observer) observer(SimulationEvent{stage, n, x, trace, r});
    };

    DomainEstimationConfig de;
    de.max_iter = config.mii;
    de.ce = config.ce - static_cast<int>(report.counterexamples.size());
    de.m = config.m;
    de.n_init = config.n_init;
    de.seed = seeds();
    de.gp = config.gp;
    de.warm_start_gp = config.warm_start_gp;
    de.prior = carried;

    DomainEstimationResult r;
    switch (config.mode) {
    case FalsifierMode::Plain:
      r = domain_estimation(
          [&](const Point& x) {
            const auto [in, trace] = simulate(x);
            const double rho = robustness(*phi, trace);
            observe(x, trace, rho);
            return rho;
          },
          Interval::below(0.0), dim, de);
      break;
    case FalsifierMode::Pas:
      r = pas_domain_estimation(
          [&](const Point& x) {
            const auto [in, trace] = simulate(x);
            std::vector<double> atoms;
            for (const auto& a : dec.atoms) atoms.push_back(robustness(*a, trace));
            observe(x, trace, -compose_robustness(*dec.skeleton, atoms));
            return atoms;
          },
          *dec.skeleton, dim, de);
      break;
    case FalsifierMode::Conditional:
      r = conditional_domain_estimation(
          [&](const Point& x) {
            const auto [in, trace] = simulate(x);
            const double rho = robustness(*phi, trace);
            observe(x, trace, rho);
            return std::vector<double>{robustness(*antecedent, trace), rho};
          },
          dim, de);
      break;
    }

    report.n_history.push_back(n);
    report.d_history.push_back(r.d);
    report.stage_simulations.push_back(r.total_evaluations());
    report.fallback_iterations.push_back(r.fallback_iterations);
    report.total_simulations += r.total_evaluations();

    for (const Point& x : r.members) {
      auto [in, trace] = simulate(x);
      ++report.verification_simulations;
      const double rho = robustness(*phi, trace);
      if (!(rho < 0.0)) {
        throw SimulationError("counterexample did not reproduce on a fresh simulation (robustness " +
                              std::to_string(rho) + "); is the model deterministic?");
      }
      report.counterexamples.push_back({x, n, stage, std::move(in), rho, std::move(trace)});
    }

    k = select_channel(k, d_prev, r.d, channels, config.keep_on_improvement);
    d_prev = r.d;
    const Counts next = expand(n, k);
    if (config.carry_knowledge) {
      std::vector<KnowledgeEntry> lifted;
      for (const auto* set : {&carried, &r.knowledge}) {
        for (const auto& e : *set) {
          lifted.push_back({embed(spec, config.parameterization, n, e.x, next), e.values});
        }
      }
      carried = std::move(lifted);
    }
    n = next;
  }
  return report;
}

} // namespace stlgp
