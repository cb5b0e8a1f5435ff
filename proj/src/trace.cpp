#include "stlgp/trace.hpp"
#include "stlgp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace stlgp {

namespace {

std::string format_number(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& field, std::size_t row) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size()) {
    throw ValidationError("csv row " + std::to_string(row) + ": not a number: '" + field + "'");
  }
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
};

CsvTable read_table(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    auto fields = split_csv_line(content);
    if (table.header.empty()) {
      if (fields.empty() || fields.front() != "t") {
        throw ValidationError("csv header must start with 't'");
      }
      table.header.assign(fields.begin() + 1, fields.end());
      continue;
    }
    if (fields.size() != table.header.size() + 1) {
      throw ValidationError("csv row " + std::to_string(row) + ": expected " +
                            std::to_string(table.header.size() + 1) + " fields, got " +
                            std::to_string(fields.size()));
    }
    table.times.push_back(parse_number(fields[0], row));
    std::vector<double> values;
    values.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) values.push_back(parse_number(fields[i], row));
    table.rows.push_back(std::move(values));
  }
  if (table.header.empty()) throw ValidationError("csv: missing header");
  return table;
}

} // namespace

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(std::vector<double> points, double horizon)
    : points_(std::move(points)), horizon_(horizon) {
  if (points_.size() < 2) throw ValidationError("time grid needs at least 2 points");
  if (std::abs(points_.front()) > kTimeTolerance) {
    throw ValidationError("time grid must start at 0");
  }
  points_.front() = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) {
      throw ValidationError("time grid must be strictly increasing");
    }
  }
  if (points_.back() > horizon_ + kTimeTolerance) {
    throw ValidationError("time grid exceeds its horizon");
  }
}

TimeGrid TimeGrid::uniform(double horizon, double step) {
  if (!(horizon > 0.0) || !(step > 0.0)) {
    throw ValidationError("uniform grid needs positive horizon and step");
  }
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  std::vector<double> points(steps + 1);
  for (std::size_t k = 0; k < steps; ++k) points[k] = static_cast<double>(k) * step;
  points[steps] = horizon;
  return TimeGrid(std::move(points), horizon);
}

std::size_t TimeGrid::floor_index(double t) const {
  if (t < -kTimeTolerance || t > back() + kTimeTolerance) {
    throw DomainError("time " + format_number(t) + " outside [0, " + format_number(back()) + "]");
  }
  auto it = std::upper_bound(points_.begin(), points_.end(), t + kTimeTolerance);
  return static_cast<std::size_t>(std::distance(points_.begin(), it)) - 1;
}

std::optional<std::size_t> TimeGrid::first_at_or_after(double t) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), t - kTimeTolerance);
  if (it == points_.end()) return std::nullopt;
  return static_cast<std::size_t>(std::distance(points_.begin(), it));
}

std::optional<std::size_t> TimeGrid::last_at_or_before(double t) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), t + kTimeTolerance);
  if (it == points_.begin()) return std::nullopt;
  return static_cast<std::size_t>(std::distance(points_.begin(), it)) - 1;
}

bool TimeGrid::same_points(const TimeGrid& other) const {
  if (points_.size() != other.points_.size()) return false;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (std::abs(points_[i] - other.points_[i]) > kTimeTolerance) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Signal

Signal::Signal(TimeGrid grid, std::vector<std::vector<double>> values,
               Interpolation interpolation)
    : grid_(std::move(grid)), dimension_(0), interpolation_(interpolation) {
  if (values.size() != grid_.size()) {
    throw ValidationError("signal needs one value per grid point");
  }
  dimension_ = values.front().size();
  data_.reserve(values.size() * dimension_);
  for (const auto& v : values) {
    if (v.size() != dimension_) throw ValidationError("signal values differ in dimension");
    data_.insert(data_.end(), v.begin(), v.end());
  }
}

Signal Signal::constant(TimeGrid grid, std::vector<double> value, Interpolation interpolation) {
  std::vector<std::vector<double>> values(grid.size(), value);
  return Signal(std::move(grid), std::move(values), interpolation);
}

std::vector<double> Signal::value_at(double t) const {
  const std::size_t i = grid_.floor_index(t);
  const auto lower = row(i);
  std::vector<double> out(lower.begin(), lower.end());
  if (interpolation_ == Interpolation::PiecewiseConstant || i + 1 == size() ||
      std::abs(t - grid_[i]) <= kTimeTolerance) {
    return out;
  }
  const double t0 = grid_[i];
  const double t1 = grid_[i + 1];
  const double w = (t - t0) / (t1 - t0);
  const auto upper = row(i + 1);
  for (std::size_t c = 0; c < dimension_; ++c) out[c] = lower[c] + w * (upper[c] - lower[c]);
  return out;
}

Signal Signal::resample(const TimeGrid& grid) const {
  std::vector<std::vector<double>> values;
  values.reserve(grid.size());
  for (double t : grid.points()) values.push_back(value_at(t));
  return Signal(grid, std::move(values), interpolation_);
}

// ---------------------------------------------------------------------------
// Trace

Trace::Trace(Signal state, Signal input, std::vector<std::string> state_names,
             std::vector<std::string> input_names)
    : state_(std::move(state)), input_(std::move(input)), state_names_(std::move(state_names)),
      input_names_(std::move(input_names)) {
  if (!state_.grid().same_points(input_.grid())) {
    throw ValidationError("state and input must share one time grid");
  }
  if (state_names_.size() != state_.dimension() || input_names_.size() != input_.dimension()) {
    throw ValidationError("variable names do not match signal dimensions");
  }
}

std::optional<std::size_t> Trace::variable_index(const std::string& name) const {
  for (std::size_t i = 0; i < state_names_.size(); ++i) {
    if (state_names_[i] == name) return i;
  }
  for (std::size_t i = 0; i < input_names_.size(); ++i) {
    if (input_names_[i] == name) return state_names_.size() + i;
  }
  return std::nullopt;
}

std::vector<std::string> Trace::variable_names() const {
  std::vector<std::string> names = state_names_;
  names.insert(names.end(), input_names_.begin(), input_names_.end());
  return names;
}

double Trace::value(std::size_t var, std::size_t i) const {
  if (var < state_.dimension()) return state_.at(i, var);
  return input_.at(i, var - state_.dimension());
}

// ---------------------------------------------------------------------------
// CSV

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << 't';
  for (const auto& name : trace.variable_names()) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < trace.grid().size(); ++i) {
    out << format_number(trace.grid()[i]);
    for (std::size_t v = 0; v < trace.variable_count(); ++v) {
      out << ',' << format_number(trace.value(v, i));
    }
    out << '\n';
  }
}

Trace read_trace_csv(std::istream& in, std::size_t input_count) {
  CsvTable table = read_table(in);
  if (input_count > table.header.size()) {
    throw ValidationError("trace csv has fewer columns than input channels");
  }
  if (table.times.size() < 2) throw ValidationError("trace csv needs at least 2 rows");
  const std::size_t state_count = table.header.size() - input_count;
  TimeGrid grid(table.times, table.times.back());
  std::vector<std::vector<double>> states, inputs;
  for (const auto& row : table.rows) {
    states.emplace_back(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(state_count));
    inputs.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(state_count), row.end());
  }
  std::vector<std::string> state_names(table.header.begin(),
                                       table.header.begin() + static_cast<std::ptrdiff_t>(state_count));
  std::vector<std::string> input_names(table.header.begin() + static_cast<std::ptrdiff_t>(state_count),
                                       table.header.end());
  return Trace(Signal(grid, std::move(states)), Signal(grid, std::move(inputs)),
               std::move(state_names), std::move(input_names));
}

void write_signal_csv(std::ostream& out, const Signal& signal,
                      const std::vector<std::string>& names) {
  if (names.size() != signal.dimension()) {
    throw ValidationError("signal csv: one name per channel required");
  }
  out << 't';
  for (const auto& name : names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < signal.size(); ++i) {
    out << format_number(signal.grid()[i]);
    for (double v : signal.row(i)) out << ',' << format_number(v);
    out << '\n';
  }
}

Signal read_signal_csv(std::istream& in, std::vector<std::string>* names) {
  CsvTable table = read_table(in);
  if (table.times.size() < 2) throw ValidationError("signal csv needs at least 2 rows");
  if (names) *names = table.header;
  return Signal(TimeGrid(table.times, table.times.back()), std::move(table.rows));
}

} // namespace stlgp
