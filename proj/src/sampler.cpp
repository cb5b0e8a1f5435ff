#include "stlgp/sampler.hpp"
#include "stlgp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

namespace stlgp {

namespace {

/// What distinguishes the three sampler variants.
struct Strategy {
  std::size_t outputs = 1;
  /// Candidate weights from the per-output posteriors, posteriors[j][c].
  std::function<double(const std::vector<std::vector<Posterior>>&, std::size_t)> weight;
  /// Optional first stage: candidates whose filter probability is below
  /// kFilterThreshold are dropped before `weight` is applied.
  std::function<double(const std::vector<std::vector<Posterior>>&, std::size_t)> filter;
  std::function<bool(const std::vector<double>&)> member;
  std::function<double(const std::vector<double>&)> distance;
};

constexpr double kFilterThreshold = 0.5;

/// The NN kernel's sigmoid features pass through the origin unless the bias
/// variance is large, so the GPs see the search box as [-1, 1]^D.
Point centered(const Point& x) {
  Point c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = 2.0 * x[i] - 1.0;
  return c;
}

std::string format_point(const Point& x) {
  std::ostringstream out;
  out.precision(17);
  out << "(";
  for (std::size_t i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x[i];
  out << ")";
  return out.str();
}

void validate(const DomainEstimationConfig& c, std::size_t dim) {
  if (dim == 0) throw ValidationError("search dimension must be positive");
  if (c.max_iter < 0) throw ValidationError("max_iter must be non-negative");
  if (c.ce < 1) throw ValidationError("ce must be at least 1");
  if (c.m < 1) throw ValidationError("m must be at least 1");
  if (c.n_init < 0) throw ValidationError("n_init must be non-negative");
  for (const auto& k : c.prior) {
    if (k.x.size() != dim) throw ValidationError("prior point has the wrong dimension");
  }
}

DomainEstimationResult run(const VectorObjective& f, std::size_t dim, const DomainEstimationConfig& cfg,
                           const Strategy& s) {
  validate(cfg, dim);
  Rng rng(cfg.seed);
  DomainEstimationResult result;
  result.d = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const Point& x) {
    std::vector<double> v;
    try {
      v = f(x);
    } catch (const std::exception& e) {
      throw EvaluationError("objective failed at " + format_point(x) + ": " + e.what(), x);
    }
    if (v.size() != s.outputs) {
      throw EvaluationError("objective returned " + std::to_string(v.size()) + " values at " + format_point(x) +
                                ", expected " + std::to_string(s.outputs),
                            x);
    }
    for (double y : v) {
      if (!std::isfinite(y)) throw EvaluationError("objective is not finite at " + format_point(x), x);
    }
    result.d = std::min(result.d, s.distance(v));
    if (s.member(v)) result.members.push_back(x);
    result.knowledge.push_back({x, std::move(v)});
  };

  const int n0 = cfg.n_init > 0 ? cfg.n_init : static_cast<int>(default_initial_points(dim));
  for (const Point& x : lhs(n0, dim, rng)) evaluate(x);
  result.initial = n0;

  std::vector<std::optional<GPHyperparameters>> previous(s.outputs);
  std::vector<std::vector<Posterior>> posteriors(s.outputs);
  std::vector<double> weights(static_cast<std::size_t>(cfg.m));
  while (static_cast<int>(result.members.size()) < cfg.ce && result.evaluations < cfg.max_iter) {
    std::vector<Point> xs;
    for (const auto& k : cfg.prior) xs.push_back(centered(k.x));
    for (const auto& k : result.knowledge) xs.push_back(centered(k.x));
    bool fitted = true;
    std::vector<GPModel> models;
    for (std::size_t j = 0; j < s.outputs; ++j) {
      std::vector<double> ys;
      for (const auto& k : cfg.prior) ys.push_back(k.values.at(j));
      for (const auto& k : result.knowledge) ys.push_back(k.values[j]);
      GPFitOptions opt = cfg.gp;
      opt.seed = rng();
      if (cfg.warm_start_gp && previous[j]) opt.warm_start = previous[j];
      if (!fitted) continue;
      try {
        models.push_back(GPModel::fit(xs, std::move(ys), opt));
        previous[j] = models.back().hyperparameters();
      } catch (const InsufficientDataError&) {
        fitted = false;
      } catch (const NumericalError&) {
        fitted = false;
      }
    }

    const std::vector<Point> candidates = lhs(cfg.m, dim, rng);
    std::size_t pick;
    if (fitted) {
      std::vector<Point> at;
      for (const Point& c : candidates) at.push_back(centered(c));
      for (std::size_t j = 0; j < s.outputs; ++j) posteriors[j] = models[j].predict(at);
      if (s.filter) {
        std::vector<std::size_t> kept;
        std::vector<double> pass(candidates.size());
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          pass[c] = s.filter(posteriors, c);
          if (pass[c] >= kFilterThreshold) kept.push_back(c);
        }
        if (kept.empty()) {
          // nothing is likely to pass: steer towards the filter instead
          pick = categorical_sample(pass, rng);
        } else {
          std::vector<double> w;
          for (std::size_t c : kept) w.push_back(s.weight(posteriors, c));
          pick = kept[categorical_sample(w, rng)];
        }
      } else {
        for (std::size_t c = 0; c < candidates.size(); ++c) weights[c] = s.weight(posteriors, c);
        pick = categorical_sample(weights, rng);
      }
    } else {
      ++result.fallback_iterations;
      pick = uniform_index(rng, candidates.size());
    }
    evaluate(candidates[pick]);
    ++result.evaluations;
  }
  if (!result.members.empty()) result.d = 0.0;
  return result;
}

} // namespace

std::vector<Point> lhs(int m, std::size_t dim, Rng& rng) {
  if (m < 1 || dim < 1) throw ValidationError("lhs needs m >= 1 and D >= 1");
  const auto n = static_cast<std::size_t>(m);
  std::vector<Point> pts(n, Point(dim));
  std::vector<std::size_t> perm(n);
  for (std::size_t d = 0; d < dim; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = (static_cast<double>(perm[i]) + uniform01(rng)) / static_cast<double>(n);
      // guard the rounding edge so the point stays inside its stratum
      pts[i][d] = std::min(v, std::nextafter((static_cast<double>(perm[i]) + 1.0) / static_cast<double>(n), 0.0));
    }
  }
  return pts;
}

double distance_to_interval(double v, const Interval& interval) {
  if (interval.empty()) throw ValidationError("distance to an empty interval");
  return interval.contains(v) ? 0.0 : interval.distance(v);
}

std::size_t categorical_sample(std::span<const double> weights, Rng& rng) {
  if (weights.empty()) throw ValidationError("categorical_sample needs at least one weight");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) return uniform_index(rng, weights.size());
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) last_positive = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  return last_positive;
}

std::size_t default_initial_points(std::size_t dim) { return std::max<std::size_t>(5, 2 * dim); }

DomainEstimationResult domain_estimation(const Objective& f, const Interval& target, std::size_t dim,
                                         const DomainEstimationConfig& config) {
  if (target.empty()) throw ValidationError("target interval is empty");
  Strategy s;
  s.weight = [&](const std::vector<std::vector<Posterior>>& p, std::size_t c) {
    return prob_in_interval(p[0][c], target);
  };
  s.member = [&](const std::vector<double>& v) { return target.contains(v[0]); };
  s.distance = [&](const std::vector<double>& v) { return distance_to_interval(v[0], target); };
  return run([&](const Point& x) { return std::vector<double>{f(x)}; }, dim, config, s);
}

DomainEstimationResult pas_domain_estimation(const VectorObjective& atoms, const Skeleton& skeleton,
                                             std::size_t dim, const DomainEstimationConfig& config) {
  const std::size_t count = skeleton.atom_bound();
  if (count == 0) throw ValidationError("skeleton references no atoms");
  Strategy s;
  s.outputs = count;
  std::vector<double> probs(count);
  s.weight = [&](const std::vector<std::vector<Posterior>>& p, std::size_t c) {
    for (std::size_t j = 0; j < count; ++j) probs[j] = prob_in_interval(p[j][c], Interval::above(0.0));
    return pas(skeleton, probs);
  };
  s.member = [&](const std::vector<double>& v) { return compose_robustness(skeleton, v) > 0.0; };
  s.distance = [&](const std::vector<double>& v) { return std::max(0.0, -compose_robustness(skeleton, v)); };
  return run(atoms, dim, config, s);
}

DomainEstimationResult pas_domain_estimation(const std::vector<Objective>& atoms, const Skeleton& skeleton,
                                             std::size_t dim, const DomainEstimationConfig& config) {
  return pas_domain_estimation(
      [&](const Point& x) {
        std::vector<double> v;
        for (const auto& a : atoms) v.push_back(a(x));
        return v;
      },
      skeleton, dim, config);
}

DomainEstimationResult conditional_domain_estimation(const VectorObjective& objective, std::size_t dim,
                                                     const DomainEstimationConfig& config) {
  Strategy s;
  s.outputs = 2;
  s.filter = [](const std::vector<std::vector<Posterior>>& p, std::size_t c) {
    return prob_in_interval(p[0][c], Interval::above(0.0));
  };
  s.weight = [](const std::vector<std::vector<Posterior>>& p, std::size_t c) {
    return prob_in_interval(p[1][c], Interval::below(0.0));
  };
  s.member = [](const std::vector<double>& v) { return v[1] < 0.0; };
  s.distance = [](const std::vector<double>& v) { return std::max(0.0, v[1]); };
  return run(objective, dim, config, s);
}

DomainEstimationResult conditional_domain_estimation(const Objective& antecedent, const Objective& requirement,
                                                     std::size_t dim, const DomainEstimationConfig& config) {
  return conditional_domain_estimation(
      [&](const Point& x) { return std::vector<double>{antecedent(x), requirement(x)}; }, dim, config);
}

} // namespace stlgp
