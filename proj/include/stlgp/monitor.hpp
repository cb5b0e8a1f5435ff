#pragma once

#include "stlgp/formula.hpp"
#include "stlgp/trace.hpp"

#include <vector>

namespace stlgp {

/// Quantitative (robustness) semantics on the sampled trace.
///
/// Suprema and infima range over the grid points inside each closed window
/// [t + lo, t + hi]; window endpoints are rounded inward to grid points.
/// Until uses the closed inner interval [t, t'] for the left operand.
///
/// Throws HorizonError when a window reaches past the last grid point or
/// contains no grid point, and ValidationError for unknown variables.
double robustness(const Formula& phi, const Trace& trace, double t = 0.0);

/// Robustness at every grid index from which the formula is monitorable.
/// Entry i is NaN when the window of some operator does not fit from t_i.
std::vector<double> robustness_signal(const Formula& phi, const Trace& trace);

/// Value of an arithmetic expression at every grid index of the trace.
std::vector<double> evaluate_expression(const Expr& e, const Trace& trace);

} // namespace stlgp
