#pragma once

#include <limits>
#include <string>

namespace stlgp {

/// Real interval with optional infinite ends. Infinite ends are always open.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;
  bool hi_closed = false;

  static Interval open(double lo, double hi) { return {lo, hi, false, false}; }
  static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
  /// (-inf, x)
  static Interval below(double x) { return {-std::numeric_limits<double>::infinity(), x, false, false}; }
  /// (x, +inf)
  static Interval above(double x) { return {x, std::numeric_limits<double>::infinity(), false, false}; }

  bool contains(double x) const {
    const bool lower_ok = lo_closed ? x >= lo : x > lo;
    const bool upper_ok = hi_closed ? x <= hi : x < hi;
    return lower_ok && upper_ok;
  }

  bool empty() const {
    if (lo < hi) return false;
    return !(lo == hi && lo_closed && hi_closed);
  }

  /// Distance from x to the closure of the interval; 0 inside.
  double distance(double x) const {
    if (x < lo) return lo - x;
    if (x > hi) return x - hi;
    return 0.0;
  }

  std::string to_string() const;
};

} // namespace stlgp
