#include "stlgp/monitor.hpp"
#include "stlgp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <unordered_map>

namespace stlgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Window {
  std::size_t first;
  std::size_t last;
};

class Evaluator {
public:
  explicit Evaluator(const Trace& trace) : trace_(trace), grid_(trace.grid()) {}

  double at(const Formula& f, std::size_t i) {
    auto& cache = cache_for(f);
    if (cache.done[i]) return cache.values[i];
    const double v = compute(f, i);
    cache.values[i] = v;
    cache.done[i] = 1;
    return v;
  }

  /// Checks monitorability from index i without throwing.
  bool fits(const Formula& f, std::size_t i) const {
    if (f.is_temporal()) {
      const auto w = window_or_null(f, i);
      if (!w) return false;
      if (f.op() == Formula::Op::Until) {
        for (std::size_t j = i; j <= w->last; ++j) {
          if (!fits(*f.child(0), j)) return false;
        }
        for (std::size_t j = w->first; j <= w->last; ++j) {
          if (!fits(*f.child(1), j)) return false;
        }
        return true;
      }
      for (std::size_t j = w->first; j <= w->last; ++j) {
        if (!fits(*f.child(), j)) return false;
      }
      return true;
    }
    for (const auto& c : f.children()) {
      if (!fits(*c, i)) return false;
    }
    return true;
  }

private:
  struct NodeCache {
    std::vector<double> values;
    std::vector<char> done;
  };

  NodeCache& cache_for(const Formula& f) {
    auto [it, inserted] = cache_.try_emplace(&f);
    if (inserted) {
      it->second.values.assign(grid_.size(), 0.0);
      it->second.done.assign(grid_.size(), 0);
      if (f.op() == Formula::Op::Atom) {
        it->second.values = evaluate_expression(*f.normalized(), trace_);
        it->second.done.assign(grid_.size(), 1);
      }
    }
    return it->second;
  }

  std::optional<Window> window_or_null(const Formula& f, std::size_t i) const {
    const double t = grid_[i];
    const TimeBounds b = f.bounds();
    if (t + b.hi > grid_.back() + kTimeTolerance) return std::nullopt;
    const auto first = grid_.first_at_or_after(t + b.lo);
    const auto last = grid_.last_at_or_before(t + b.hi);
    if (!first || !last || *first > *last) return std::nullopt;
    return Window{*first, *last};
  }

  Window window(const Formula& f, std::size_t i) const {
    const double t = grid_[i];
    const TimeBounds b = f.bounds();
    if (t + b.hi > grid_.back() + kTimeTolerance) {
      throw HorizonError("operator " + f.operator_label() + " at t=" + std::to_string(t) +
                         " needs the trace up to " + std::to_string(t + b.hi) +
                         " but it ends at " + std::to_string(grid_.back()));
    }
    const auto w = window_or_null(f, i);
    if (!w) {
      throw HorizonError("operator " + f.operator_label() + " at t=" + std::to_string(t) +
                         " has no grid point inside its window");
    }
    return *w;
  }

  double compute(const Formula& f, std::size_t i) {
    using Op = Formula::Op;
    switch (f.op()) {
      case Op::True: return kInf;
      case Op::False: return -kInf;
      case Op::Atom: return cache_for(f).values[i];
      case Op::Not: return -at(*f.child(), i);
      case Op::And: return std::min(at(*f.child(0), i), at(*f.child(1), i));
      case Op::Or: return std::max(at(*f.child(0), i), at(*f.child(1), i));
      case Op::Eventually: {
        const Window w = window(f, i);
        double best = -kInf;
        for (std::size_t j = w.first; j <= w.last; ++j) best = std::max(best, at(*f.child(), j));
        return best;
      }
      case Op::Globally: {
        const Window w = window(f, i);
        double worst = kInf;
        for (std::size_t j = w.first; j <= w.last; ++j) worst = std::min(worst, at(*f.child(), j));
        return worst;
      }
      case Op::Until: {
        const Window w = window(f, i);
        const Formula& left = *f.child(0);
        const Formula& right = *f.child(1);
        double prefix = kInf;
        for (std::size_t j = i; j < w.first; ++j) prefix = std::min(prefix, at(left, j));
        double best = -kInf;
        for (std::size_t j = w.first; j <= w.last; ++j) {
          prefix = std::min(prefix, at(left, j));
          best = std::max(best, std::min(at(right, j), prefix));
        }
        return best;
      }
    }
    return 0.0;
  }

  const Trace& trace_;
  const TimeGrid& grid_;
  std::unordered_map<const Formula*, NodeCache> cache_;
};

} // namespace

std::vector<double> evaluate_expression(const Expr& e, const Trace& trace) {
  const std::size_t n = trace.grid().size();
  using Kind = Expr::Kind;
  switch (e.kind()) {
    case Kind::Number: return std::vector<double>(n, e.value());
    case Kind::Variable: {
      const auto var = trace.variable_index(e.name());
      if (!var) throw ValidationError("unknown variable '" + e.name() + "' in formula");
      std::vector<double> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = trace.value(*var, i);
      return out;
    }
    case Kind::Negate: {
      auto out = evaluate_expression(*e.lhs(), trace);
      for (double& v : out) v = -v;
      return out;
    }
    default: break;
  }
  auto lhs = evaluate_expression(*e.lhs(), trace);
  const auto rhs = evaluate_expression(*e.rhs(), trace);
  for (std::size_t i = 0; i < n; ++i) {
    switch (e.kind()) {
      case Kind::Add: lhs[i] += rhs[i]; break;
      case Kind::Subtract: lhs[i] -= rhs[i]; break;
      case Kind::Multiply: lhs[i] *= rhs[i]; break;
      case Kind::Divide: lhs[i] /= rhs[i]; break;
      default: break;
    }
  }
  return lhs;
}

double robustness(const Formula& phi, const Trace& trace, double t) {
  const TimeGrid& grid = trace.grid();
  const auto index = grid.last_at_or_before(t);
  if (t < -kTimeTolerance || !index || std::abs(grid[*index] - t) > kTimeTolerance) {
    throw DomainError("robustness requested at t=" + std::to_string(t) +
                      ", which is not a grid point of the trace");
  }
  Evaluator eval(trace);
  return eval.at(phi, *index);
}

std::vector<double> robustness_signal(const Formula& phi, const Trace& trace) {
  Evaluator eval(trace);
  std::vector<double> out(trace.grid().size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!eval.fits(phi, i)) continue;
    out[i] = eval.at(phi, i);
  }
  return out;
}

} // namespace stlgp
