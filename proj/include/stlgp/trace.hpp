#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stlgp {

/// Absolute tolerance used whenever a time is matched against grid points.
inline constexpr double kTimeTolerance = 1e-12;

enum class Interpolation { PiecewiseConstant, PiecewiseLinear };

/// Strictly increasing time points starting at 0, inside a horizon [0, T].
class TimeGrid {
public:
  TimeGrid(std::vector<double> points, double horizon);

  /// Grid 0, h, 2h, ... whose last point is exactly `horizon`.
  static TimeGrid uniform(double horizon, double step);

  const std::vector<double>& points() const { return points_; }
  double horizon() const { return horizon_; }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double back() const { return points_.back(); }

  /// Index of the latest grid point <= t. Throws DomainError outside [0, back()].
  std::size_t floor_index(double t) const;
  /// First index whose time is >= t, if any.
  std::optional<std::size_t> first_at_or_after(double t) const;
  /// Last index whose time is <= t, if any.
  std::optional<std::size_t> last_at_or_before(double t) const;

  bool same_points(const TimeGrid& other) const;

private:
  std::vector<double> points_;
  double horizon_;
};

/// Vector-valued samples on a TimeGrid with an interpolation rule between them.
class Signal {
public:
  Signal(TimeGrid grid, std::vector<std::vector<double>> values,
         Interpolation interpolation = Interpolation::PiecewiseConstant);

  static Signal constant(TimeGrid grid, std::vector<double> value,
                         Interpolation interpolation = Interpolation::PiecewiseConstant);

  const TimeGrid& grid() const { return grid_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return grid_.size(); }
  Interpolation interpolation() const { return interpolation_; }

  /// Stored sample at grid index i.
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dimension_, dimension_};
  }
  double at(std::size_t i, std::size_t channel) const { return data_[i * dimension_ + channel]; }

  std::vector<double> value_at(double t) const;
  Signal resample(const TimeGrid& grid) const;

private:
  TimeGrid grid_;
  std::size_t dimension_;
  std::vector<double> data_; // row per time point
  Interpolation interpolation_;
};

/// Sampled path of a system: state and input signals on one shared grid.
class Trace {
public:
  Trace(Signal state, Signal input, std::vector<std::string> state_names,
        std::vector<std::string> input_names);

  const TimeGrid& grid() const { return state_.grid(); }
  const Signal& state() const { return state_; }
  const Signal& input() const { return input_; }
  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<std::string>& input_names() const { return input_names_; }

  /// Number of named variables (state first, then input).
  std::size_t variable_count() const { return state_names_.size() + input_names_.size(); }
  std::optional<std::size_t> variable_index(const std::string& name) const;
  std::vector<std::string> variable_names() const;
  /// Value of variable `var` (combined index) at grid index `i`.
  double value(std::size_t var, std::size_t i) const;

private:
  Signal state_;
  Signal input_;
  std::vector<std::string> state_names_;
  std::vector<std::string> input_names_;
};

/// CSV with header `t,<state names>,<input names>`, one row per grid point.
void write_trace_csv(std::ostream& out, const Trace& trace);
/// Inverse of write_trace_csv. The last `input_count` columns become the input
/// signal. Lines starting with '#' are skipped.
Trace read_trace_csv(std::istream& in, std::size_t input_count = 0);

/// CSV with header `t,<names>` for a bare signal (external simulator input).
void write_signal_csv(std::ostream& out, const Signal& signal,
                      const std::vector<std::string>& names);
Signal read_signal_csv(std::istream& in, std::vector<std::string>* names = nullptr);

} // namespace stlgp
