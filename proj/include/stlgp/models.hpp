#pragma once

#include "stlgp/formula.hpp"
#include "stlgp/parameterization.hpp"
#include "stlgp/trace.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace stlgp {

/// Black-box system under test. Implementations are stateless, so concurrent
/// calls to simulate are allowed.
class Simulator {
public:
  virtual ~Simulator() = default;

  virtual std::string name() const = 0;
  virtual std::vector<std::string> state_names() const = 0;
  virtual std::vector<std::string> input_names() const = 0;
  /// Length of the x0 vector accepted by simulate (0 for a fixed initial state).
  virtual std::size_t initial_state_dimension() const { return 0; }
  virtual double default_horizon() const = 0;
  virtual double default_step() const = 0;
  /// Input ranges and interpolation used when a configuration gives none.
  virtual InputSpec default_input_spec() const;

  /// Trace on the uniform grid with step h over [0, T]. The input signal must
  /// cover [0, T]; it is resampled onto the simulation grid.
  virtual Trace simulate(const std::vector<double>& x0, const Signal& input, double T, double h) const = 0;

  std::size_t input_count() const { return input_names().size(); }
  std::size_t state_dimension() const { return state_names().size(); }
};

using SimulatorPtr = std::shared_ptr<const Simulator>;

/// x = u, no initial state. Defaults T = 1, h = 0.01.
class ToySimulator : public Simulator {
public:
  std::string name() const override { return "toy"; }
  std::vector<std::string> state_names() const override { return {"x"}; }
  std::vector<std::string> input_names() const override { return {"u"}; }
  double default_horizon() const override { return 1.0; }
  double default_step() const override { return 0.01; }
  Trace simulate(const std::vector<double>& x0, const Signal& input, double T, double h) const override;
};

/// exp(-(x - m)^2 / (2 s^2)), peak value 1.
double gaussian_bump(double x, double m, double s);

/// rho1 = x^2 + 1 and rho2 = -0.2 + 0.9 (1 - h(x, 0.7, 0.035) - h(x, 0.85, 0.035)).
std::array<double, 2> analytic_pair(double x);

/// Wraps analytic_pair as a model: states r1, r2 are the pair evaluated at the
/// current input value. With constant inputs the formula `r1 > 0 and r2 > 0`
/// has robustness min(rho1, rho2).
class AnalyticPairSimulator : public Simulator {
public:
  std::string name() const override { return "analytic-pair"; }
  std::vector<std::string> state_names() const override { return {"r1", "r2"}; }
  std::vector<std::string> input_names() const override { return {"x"}; }
  double default_horizon() const override { return 1.0; }
  double default_step() const override { return 0.1; }
  Trace simulate(const std::vector<double>& x0, const Signal& input, double T, double h) const override;
};

/// Calibrated constants of the transmission surrogate. Speeds in km/h,
/// engine speed in rpm, accelerations in km/h per second.
struct TransmissionConstants {
  std::array<double, 4> gear_ratio{14.0, 8.5, 5.6, 4.2};
  /// rpm per km/h per unit of gear ratio.
  double final_drive = 8.84;
  /// Wheel acceleration at full torque in first gear.
  double peak_acceleration = 22.0;
  double drag = 1e-4;
  /// Deceleration at full brake once the car is moving.
  double brake_deceleration = 8.0;
  /// Speed scale of the brake taper near standstill.
  double brake_taper = 2.0;
  double clutch_time_constant = 0.2;
  /// Torque vanishes at throttle/100 * max_rpm.
  double max_rpm = 6000.0;
  double torque_gain = 2.0;
  double upshift_rpm = 4000.0;
  double downshift_rpm = 1500.0;
};

/// Two-state hybrid ODE standing in for an automatic transmission: vehicle
/// speed v and engine speed w, inputs throttle and brake in [0, 100].
///
///   v' = a g_k / g_1 * torque(throttle, w) - drag v^2 - b brake/100 tanh(v / v_b)
///   w' = (c g_k v - w) / tau
///
/// torque = clamp(k (throttle/100 - w/max_rpm), 0, 1). Fixed-step RK4. The
/// gear moves up when w reaches 4000 and down when w falls to 1500; a step that
/// crosses a threshold is split at the crossing, so shift times do not snap to
/// the grid.
/// x0 is (v0, w0), empty for the default (0, 0); the gear starts at 1.
class TransmissionSimulator : public Simulator {
public:
  explicit TransmissionSimulator(TransmissionConstants constants = {}) : c_(constants) {}

  std::string name() const override { return "transmission"; }
  std::vector<std::string> state_names() const override { return {"v", "w"}; }
  std::vector<std::string> input_names() const override { return {"throttle", "brake"}; }
  std::size_t initial_state_dimension() const override { return 2; }
  double default_horizon() const override { return 30.0; }
  double default_step() const override { return 0.05; }
  InputSpec default_input_spec() const override;
  Trace simulate(const std::vector<double>& x0, const Signal& input, double T, double h) const override;

  /// Same run, also returning the gear (1-4) at every grid point.
  Trace simulate_with_gear(const std::vector<double>& x0, const Signal& input, double T, double h,
                           std::vector<int>* gears) const;

  const TransmissionConstants& constants() const { return c_; }

private:
  TransmissionConstants c_;
};

/// External simulator driven over pipes. The input signal is written as CSV
/// (`t,<input names>`) to the command's stdin, preceded by a `# x0: a,b,...`
/// line when x0 is not empty. The command must print a CSV trace with header
/// `t,<state names>` on stdout; extra columns named like inputs are dropped.
/// A non-zero exit status raises SimulationError with the captured stderr.
class SubprocessSimulator : public Simulator {
public:
  struct Options {
    std::string command;
    std::vector<std::string> state_names;
    std::vector<std::string> input_names;
    std::size_t initial_state_dimension = 0;
    double horizon = 1.0;
    double step = 0.01;
    std::string name = "subprocess";
  };

  explicit SubprocessSimulator(Options options);

  std::string name() const override { return o_.name; }
  std::vector<std::string> state_names() const override { return o_.state_names; }
  std::vector<std::string> input_names() const override { return o_.input_names; }
  std::size_t initial_state_dimension() const override { return o_.initial_state_dimension; }
  double default_horizon() const override { return o_.horizon; }
  double default_step() const override { return o_.step; }
  Trace simulate(const std::vector<double>& x0, const Signal& input, double T, double h) const override;

private:
  Options o_;
};

/// Built-in models: "toy", "analytic-pair", "transmission".
SimulatorPtr make_simulator(const std::string& name);
std::vector<std::string> simulator_names();

/// Transmission requirements.
///   1: G[0,30](v <= vbar and w <= wbar)
///   2: not (G[0,30] w <= wbar) or G[0,10](v <= vbar)
///   3: F[0,10](v >= vbar and G[0,20](w <= wbar))
FormulaPtr at_requirements(double vbar, double wbar, int variant);

} // namespace stlgp
