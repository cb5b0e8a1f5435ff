#pragma once

#include "stlgp/trace.hpp"

#include <span>
#include <string>
#include <vector>

namespace stlgp {

enum class ParamMode {
  /// Values at uniformly spaced times.
  Fixed,
  /// Control-point times are search variables too.
  Adaptive,
};

struct ChannelSpec {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  Interpolation interpolation = Interpolation::PiecewiseConstant;
};

struct StateRange {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

struct InputSpec {
  std::vector<ChannelSpec> channels;
  /// Box of initial states; empty when the initial state is fixed.
  std::vector<StateRange> initial_state;
  double horizon = 1.0;

  void validate() const;
};

/// Control-point counts per channel.
using Counts = std::vector<int>;

struct ControlPoint {
  double t = 0.0;
  double u = 0.0;
};

struct DecodedInput {
  Signal input;
  std::vector<double> x0;
  /// Per channel, sorted by time, starting with the base value at t = 0.
  std::vector<std::vector<ControlPoint>> control_points;
  /// Coordinates that were outside [0, 1] and got clamped.
  int clamped = 0;
};

/// Fixed: sum(n_k + 1) + q. Adaptive: sum(2 n_k + 1) + q.
std::size_t dimension(const InputSpec& spec, ParamMode mode, const Counts& n);

/// Maps unit-box coordinates to an input signal on the grid and an initial
/// state. Adaptive layout per channel: base value, then (time, value) pairs;
/// the initial-state coordinates come last.
DecodedInput decode(const InputSpec& spec, ParamMode mode, const Counts& n, std::span<const double> coords,
                    const TimeGrid& grid);

/// n + e_k.
Counts expand(const Counts& n, std::size_t k);

/// Coordinates in the space of `next` (one more point on one channel) that
/// decode to the same signal: the new point sits at the horizon with the
/// channel's final value. Adaptive mode only.
std::vector<double> embed(const InputSpec& spec, ParamMode mode, const Counts& n, std::span<const double> coords,
                          const Counts& next);

} // namespace stlgp
