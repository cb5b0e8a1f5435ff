#include "stlgp/models.hpp"
#include "stlgp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

namespace stlgp {

namespace {

void check_run(const Simulator& sim, const std::vector<double>& x0, const Signal& input, double T, double h) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("horizon must be positive");
  if (!(h > 0.0) || !std::isfinite(h) || h > T) throw ValidationError("step must be in (0, T]");
  if (input.dimension() != sim.input_count()) {
    throw ValidationError(sim.name() + " expects " + std::to_string(sim.input_count()) + " input channels, got " +
                          std::to_string(input.dimension()));
  }
  if (input.grid().back() < T - kTimeTolerance) {
    throw ValidationError("input signal ends before the horizon");
  }
  if (!x0.empty() && x0.size() != sim.initial_state_dimension()) {
    throw ValidationError(sim.name() + " expects an initial state of size " +
                          std::to_string(sim.initial_state_dimension()));
  }
}

/// Removes a file when it goes out of scope.
struct TempFile {
  std::string path;

  explicit TempFile(const char* tag) {
    std::string pattern = (std::filesystem::temp_directory_path() / (std::string("stlgp-") + tag + "-XXXXXX")).string();
    const int fd = ::mkstemp(pattern.data());
    if (fd < 0) throw SimulationError("cannot create a temporary file");
    ::close(fd);
    path = pattern;
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

} // namespace

InputSpec Simulator::default_input_spec() const {
  InputSpec spec;
  for (const auto& n : input_names()) spec.channels.push_back({n, 0.0, 1.0, Interpolation::PiecewiseConstant});
  spec.horizon = default_horizon();
  return spec;
}

// ---------------------------------------------------------------------------

Trace ToySimulator::simulate(const std::vector<double>& x0, const Signal& input, double T, double h) const {
  check_run(*this, x0, input, T, h);
  const Signal u = input.resample(TimeGrid::uniform(T, h));
  return Trace(u, u, state_names(), input_names());
}

double gaussian_bump(double x, double m, double s) { return std::exp(-(x - m) * (x - m) / (2.0 * s * s)); }

std::array<double, 2> analytic_pair(double x) {
  return {x * x + 1.0, -0.2 + 0.9 * (1.0 - gaussian_bump(x, 0.7, 0.035) - gaussian_bump(x, 0.85, 0.035))};
}

Trace AnalyticPairSimulator::simulate(const std::vector<double>& x0, const Signal& input, double T,
                                      double h) const {
  check_run(*this, x0, input, T, h);
  const Signal u = input.resample(TimeGrid::uniform(T, h));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto r = analytic_pair(u.at(i, 0));
    rows.push_back({r[0], r[1]});
  }
  return Trace(Signal(u.grid(), std::move(rows), u.interpolation()), u, state_names(), input_names());
}

// ---------------------------------------------------------------------------

InputSpec TransmissionSimulator::default_input_spec() const {
  InputSpec spec;
  spec.channels.push_back({"throttle", 0.0, 100.0, Interpolation::PiecewiseConstant});
  spec.channels.push_back({"brake", 0.0, 100.0, Interpolation::PiecewiseConstant});
  spec.horizon = default_horizon();
  return spec;
}

Trace TransmissionSimulator::simulate(const std::vector<double>& x0, const Signal& input, double T,
                                      double h) const {
  return simulate_with_gear(x0, input, T, h, nullptr);
}

Trace TransmissionSimulator::simulate_with_gear(const std::vector<double>& x0, const Signal& input, double T,
                                                double h, std::vector<int>* gears) const {
  check_run(*this, x0, input, T, h);
  const TimeGrid grid = TimeGrid::uniform(T, h);
  const bool hold = input.interpolation() == Interpolation::PiecewiseConstant;

  int gear = 0;
  auto rhs = [&](double v, double w, double throttle, double brake, double out[2]) {
    const double g = c_.gear_ratio[static_cast<std::size_t>(gear)];
    const double torque = std::clamp(c_.torque_gain * (throttle / 100.0 - w / c_.max_rpm), 0.0, 1.0);
    out[0] = c_.peak_acceleration * g / c_.gear_ratio[0] * torque - c_.drag * v * v -
             c_.brake_deceleration * brake / 100.0 * std::tanh(v / c_.brake_taper);
    out[1] = (c_.final_drive * g * v - w) / c_.clutch_time_constant;
  };

  double v = x0.empty() ? 0.0 : x0[0];
  double w = x0.empty() ? 0.0 : x0[1];
  if (v < 0.0 || w < 0.0) throw ValidationError("transmission initial speeds must be non-negative");

  using Inputs = std::array<std::vector<double>, 3>;
  auto rk4 = [&](double& sv, double& sw, const Inputs& u, double dt) {
    double k1[2], k2[2], k3[2], k4[2];
    rhs(sv, sw, u[0][0], u[0][1], k1);
    rhs(sv + 0.5 * dt * k1[0], sw + 0.5 * dt * k1[1], u[1][0], u[1][1], k2);
    rhs(sv + 0.5 * dt * k2[0], sw + 0.5 * dt * k2[1], u[1][0], u[1][1], k3);
    rhs(sv + dt * k3[0], sw + dt * k3[1], u[2][0], u[2][1], k4);
    sv = std::max(0.0, sv + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]));
    sw = std::max(0.0, sw + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]));
  };
  auto inputs = [&](double t, double dt) -> Inputs {
    const auto u0 = input.value_at(t);
    if (hold) return {u0, u0, u0};
    return {u0, input.value_at(t + 0.5 * dt), input.value_at(std::min(t + dt, grid.back()))};
  };
  // +1 up, -1 down, 0 none
  auto shift_due = [&](double rpm) {
    if (rpm >= c_.upshift_rpm && gear < 3) return 1;
    if (rpm <= c_.downshift_rpm && gear > 0) return -1;
    return 0;
  };

  std::vector<std::vector<double>> rows{{v, w}};
  if (gears) gears->assign(1, 1);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double t = grid[i];
    const double dt = grid[i + 1] - t;
    double v1 = v, w1 = w;
    rk4(v1, w1, inputs(t, dt), dt);
    if (const int dir = shift_due(w1); dir != 0 && shift_due(w) != dir) {
      // locate the threshold crossing inside the step, then finish it in the new gear
      const double level = dir > 0 ? c_.upshift_rpm : c_.downshift_rpm;
      double lo = 0.0, hi = dt;
      for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        double vm = v, wm = w;
        rk4(vm, wm, inputs(t, mid), mid);
        if ((dir > 0) == (wm >= level)) hi = mid;
        else lo = mid;
      }
      rk4(v, w, inputs(t, hi), hi);
      gear += dir;
      if (dt - hi > 0.0) rk4(v, w, inputs(t + hi, dt - hi), dt - hi);
    } else {
      v = v1;
      w = w1;
      gear += dir;
    }
    rows.push_back({v, w});
    if (gears) gears->push_back(gear + 1);
  }
  return Trace(Signal(grid, std::move(rows), Interpolation::PiecewiseLinear), input.resample(grid), state_names(),
               input_names());
}

// ---------------------------------------------------------------------------

SubprocessSimulator::SubprocessSimulator(Options options) : o_(std::move(options)) {
  if (o_.command.empty()) throw ValidationError("external simulator command is empty");
  if (o_.state_names.empty()) throw ValidationError("external simulator needs at least one state name");
  if (o_.input_names.empty()) throw ValidationError("external simulator needs at least one input name");
}

Trace SubprocessSimulator::simulate(const std::vector<double>& x0, const Signal& input, double T, double h) const {
  check_run(*this, x0, input, T, h);
  const TimeGrid grid = TimeGrid::uniform(T, h);
  const Signal u = input.resample(grid);

  TempFile in_file("in"), err_file("err");
  {
    std::ofstream out(in_file.path);
    if (!x0.empty()) {
      out.precision(17);
      out << "# x0: ";
      for (std::size_t i = 0; i < x0.size(); ++i) out << (i ? "," : "") << x0[i];
      out << "\n";
    }
    write_signal_csv(out, u, o_.input_names);
    if (!out) throw SimulationError("cannot write the simulator input");
  }

  const std::string cmd = o_.command + " < " + shell_quote(in_file.path) + " 2> " + shell_quote(err_file.path);
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw SimulationError("cannot start '" + o_.command + "'");
  std::string output;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
  const int status = ::pclose(pipe);
  const std::string errors = read_file(err_file.path);
  if (status != 0) {
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    throw SimulationError("'" + o_.command + "' exited with status " + std::to_string(code) +
                          (errors.empty() ? std::string() : ": " + errors));
  }

  Trace raw = [&] {
    std::istringstream in(output);
    try {
      return read_trace_csv(in, 0);
    } catch (const Error& e) {
      throw SimulationError("'" + o_.command + "' printed an unreadable trace: " + e.what() +
                            (errors.empty() ? std::string() : " (stderr: " + errors + ")"));
    }
  }();
  if (raw.grid().back() < T - kTimeTolerance) throw SimulationError("external trace ends before the horizon");

  std::vector<std::vector<double>> rows(raw.grid().size());
  for (const auto& name : o_.state_names) {
    const auto idx = raw.variable_index(name);
    if (!idx) throw SimulationError("external trace has no column '" + name + "'");
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].push_back(raw.value(*idx, i));
  }
  const TimeGrid& out_grid = raw.grid();
  return Trace(Signal(out_grid, std::move(rows), Interpolation::PiecewiseLinear), input.resample(out_grid),
               o_.state_names, o_.input_names);
}

// ---------------------------------------------------------------------------

SimulatorPtr make_simulator(const std::string& name) {
  if (name == "toy") return std::make_shared<ToySimulator>();
  if (name == "analytic-pair") return std::make_shared<AnalyticPairSimulator>();
  if (name == "transmission") return std::make_shared<TransmissionSimulator>();
  throw ValidationError("unknown model '" + name + "'");
}

std::vector<std::string> simulator_names() { return {"toy", "analytic-pair", "transmission"}; }

FormulaPtr at_requirements(double vbar, double wbar, int variant) {
  if (!(vbar > 0.0) || !(wbar > 0.0)) throw ValidationError("requirement thresholds must be positive");
  auto v_le = Formula::atom(Expr::variable("v"), Comparison::LessEqual, Expr::number(vbar));
  auto w_le = Formula::atom(Expr::variable("w"), Comparison::LessEqual, Expr::number(wbar));
  switch (variant) {
  case 1:
    return Formula::globally({0, 30}, Formula::conjunction(v_le, w_le));
  case 2:
    return Formula::disjunction(Formula::negation(Formula::globally({0, 30}, w_le)),
                                Formula::globally({0, 10}, v_le));
  case 3:
    return Formula::eventually(
        {0, 10}, Formula::conjunction(Formula::atom(Expr::variable("v"), Comparison::GreaterEqual, Expr::number(vbar)),
                                      Formula::globally({0, 20}, w_le)));
  default:
    throw ValidationError("requirement variant must be 1, 2 or 3");
  }
}

} // namespace stlgp
