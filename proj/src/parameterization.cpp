#include "stlgp/parameterization.hpp"
#include "stlgp/errors.hpp"

#include <algorithm>
#include <cmath>

namespace stlgp {

namespace {

void check_counts(const InputSpec& spec, const Counts& n) {
  if (n.size() != spec.channels.size()) {
    throw ValidationError("expected " + std::to_string(spec.channels.size()) + " control-point counts, got " +
                          std::to_string(n.size()));
  }
  for (int k : n) {
    if (k < 0) throw ValidationError("control-point counts must be non-negative");
  }
}

std::size_t channel_width(ParamMode mode, int n) {
  return mode == ParamMode::Fixed ? static_cast<std::size_t>(n) + 1 : 2 * static_cast<std::size_t>(n) + 1;
}

/// Value of the interpolant through sorted control points at time t.
double interpolate(const std::vector<ControlPoint>& cps, Interpolation mode, double t) {
  std::size_t last = 0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i].t <= t + kTimeTolerance) last = i;
  }
  if (mode == Interpolation::PiecewiseConstant || last + 1 == cps.size()) return cps[last].u;
  const ControlPoint& a = cps[last];
  const ControlPoint& b = cps[last + 1];
  if (b.t - a.t <= kTimeTolerance) return b.u;
  const double w = (t - a.t) / (b.t - a.t);
  return a.u + w * (b.u - a.u);
}

} // namespace

void InputSpec::validate() const {
  if (channels.empty()) throw ValidationError("at least one input channel is required");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("horizon must be positive");
  for (const auto& c : channels) {
    if (!(c.lo < c.hi)) throw ValidationError("input '" + c.name + "' needs min < max");
  }
  for (const auto& s : initial_state) {
    if (!(s.lo <= s.hi)) throw ValidationError("initial state '" + s.name + "' needs min <= max");
  }
}

std::size_t dimension(const InputSpec& spec, ParamMode mode, const Counts& n) {
  check_counts(spec, n);
  std::size_t d = spec.initial_state.size();
  for (int k : n) d += channel_width(mode, k);
  return d;
}

DecodedInput decode(const InputSpec& spec, ParamMode mode, const Counts& n, std::span<const double> coords,
                    const TimeGrid& grid) {
  const std::size_t dim = dimension(spec, mode, n);
  if (coords.size() != dim) {
    throw ValidationError("parameter vector has " + std::to_string(coords.size()) + " coordinates, expected " +
                          std::to_string(dim));
  }
  int clamped = 0;
  auto unit = [&](std::size_t i) {
    const double c = coords[i];
    if (std::isnan(c)) throw ValidationError("parameter coordinate " + std::to_string(i) + " is NaN");
    if (c < 0.0 || c > 1.0) ++clamped;
    return std::clamp(c, 0.0, 1.0);
  };

  const double T = spec.horizon;
  std::vector<std::vector<ControlPoint>> cps(spec.channels.size());
  std::size_t pos = 0;
  for (std::size_t k = 0; k < spec.channels.size(); ++k) {
    const ChannelSpec& ch = spec.channels[k];
    auto value = [&](std::size_t i) { return ch.lo + unit(i) * (ch.hi - ch.lo); };
    const int nk = n[k];
    if (mode == ParamMode::Fixed) {
      for (int j = 0; j <= nk; ++j) {
        cps[k].push_back({static_cast<double>(j) * T / std::max(nk, 1), value(pos++)});
      }
    } else {
      cps[k].push_back({0.0, value(pos++)});
      std::vector<ControlPoint> pairs;
      for (int j = 0; j < nk; ++j) {
        const double t = unit(pos++) * T;
        pairs.push_back({t, value(pos++)});
      }
      std::stable_sort(pairs.begin(), pairs.end(), [](const ControlPoint& a, const ControlPoint& b) { return a.t < b.t; });
      cps[k].insert(cps[k].end(), pairs.begin(), pairs.end());
    }
  }
  std::vector<double> x0;
  for (const auto& s : spec.initial_state) x0.push_back(s.lo + unit(pos++) * (s.hi - s.lo));

  bool all_linear = true;
  for (const auto& ch : spec.channels) all_linear = all_linear && ch.interpolation == Interpolation::PiecewiseLinear;

  std::vector<std::vector<double>> rows(grid.size(), std::vector<double>(spec.channels.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = 0; k < spec.channels.size(); ++k) {
      rows[i][k] = interpolate(cps[k], spec.channels[k].interpolation, grid[i]);
    }
  }
  return DecodedInput{
      Signal(grid, std::move(rows), all_linear ? Interpolation::PiecewiseLinear : Interpolation::PiecewiseConstant),
      std::move(x0), std::move(cps), clamped};
}

Counts expand(const Counts& n, std::size_t k) {
  if (k >= n.size()) throw ValidationError("channel index " + std::to_string(k) + " out of range");
  Counts out = n;
  ++out[k];
  return out;
}

std::vector<double> embed(const InputSpec& spec, ParamMode mode, const Counts& n, std::span<const double> coords,
                          const Counts& next) {
  if (mode != ParamMode::Adaptive) {
    throw ValidationError("embedding is only defined for the adaptive parameterization");
  }
  check_counts(spec, n);
  check_counts(spec, next);
  if (coords.size() != dimension(spec, mode, n)) throw ValidationError("parameter vector has the wrong size");
  std::size_t grown = n.size();
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (next[k] == n[k] + 1 && grown == n.size()) {
      grown = k;
    } else if (next[k] != n[k]) {
      grown = n.size() + 1;
      break;
    }
  }
  if (grown >= n.size()) throw ValidationError("target counts are not a one-step expansion");

  std::vector<double> out;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < n.size(); ++k) {
    const std::size_t width = channel_width(mode, n[k]);
    out.insert(out.end(), coords.begin() + static_cast<long>(pos), coords.begin() + static_cast<long>(pos + width));
    if (k == grown) {
      // value coordinate of the latest control point (base value when there is none)
      std::size_t latest = pos;
      double latest_t = 0.0;
      for (int j = 0; j < n[k]; ++j) {
        const std::size_t tpos = pos + 1 + 2 * static_cast<std::size_t>(j);
        const double t = std::clamp(coords[tpos], 0.0, 1.0);
        if (t >= latest_t) {
          latest_t = t;
          latest = tpos + 1;
        }
      }
      out.push_back(1.0);
      out.push_back(coords[latest]);
    }
    pos += width;
  }
  out.insert(out.end(), coords.begin() + static_cast<long>(pos), coords.end());
  return out;
}

} // namespace stlgp
