#pragma once

#include "stlgp/decomposition.hpp"
#include "stlgp/gp.hpp"
#include "stlgp/interval.hpp"
#include "stlgp/rng.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace stlgp {

using Objective = std::function<double(const Point&)>;
/// Several outputs from one evaluation (one simulation feeds every atom).
using VectorObjective = std::function<std::vector<double>(const Point&)>;

struct KnowledgeEntry {
  Point x;
  std::vector<double> values;
};

struct DomainEstimationConfig {
  int max_iter = 100;
  /// Counterexamples requested; the loop stops once this many are found.
  int ce = 1;
  /// Latin hypercube candidates drawn per iteration.
  int m = 500;
  /// Initial random evaluations; 0 selects max(5, 2 D).
  int n_init = 0;
  std::uint64_t seed = 0;
  GPFitOptions gp;
  /// Start each refit from the previous iteration's hyperparameters.
  bool warm_start_gp = true;
  /// Evaluations known from elsewhere. They train the GPs but are not
  /// counted, and do not affect d or the members.
  std::vector<KnowledgeEntry> prior;
};

struct DomainEstimationResult {
  std::vector<Point> members;
  /// Smallest distance of an evaluated value to the target set; 0 once a member is found.
  double d = 0.0;
  /// Loop iterations, one evaluation each, not counting the initial design.
  int evaluations = 0;
  int initial = 0;
  std::vector<KnowledgeEntry> knowledge;
  /// Iterations where no GP could be fitted and candidates were drawn uniformly.
  int fallback_iterations = 0;

  int total_evaluations() const { return initial + evaluations; }
};

/// m points in [0,1]^D, one per stratum [j/m, (j+1)/m) in every coordinate.
std::vector<Point> lhs(int m, std::size_t dim, Rng& rng);

double distance_to_interval(double v, const Interval& interval);

/// Index drawn with probability proportional to its weight, uniform when all
/// weights are zero. Negative or non-finite weights are rejected.
std::size_t categorical_sample(std::span<const double> weights, Rng& rng);

std::size_t default_initial_points(std::size_t dim);

/// Active sampling of points whose objective lies in the interval.
DomainEstimationResult domain_estimation(const Objective& f, const Interval& target, std::size_t dim,
                                         const DomainEstimationConfig& config);

/// One GP per atom robustness. Candidates are weighted by the probabilistic
/// approximation of the skeleton with P(atom > 0). A point is a member when
/// the skeleton composed from the true atom robustness values is > 0, which
/// agrees with evaluating the skeleton on the atom signs away from ties at 0.
DomainEstimationResult pas_domain_estimation(const VectorObjective& atoms, const Skeleton& skeleton,
                                             std::size_t dim, const DomainEstimationConfig& config);

DomainEstimationResult pas_domain_estimation(const std::vector<Objective>& atoms, const Skeleton& skeleton,
                                             std::size_t dim, const DomainEstimationConfig& config);

/// Conditional safety search. The objective returns {antecedent robustness,
/// requirement robustness}. Candidates with P(antecedent > 0) < 1/2 are
/// dropped and the rest are weighted by P(requirement < 0). When none is
/// left, candidates are weighted by P(antecedent > 0). A member has
/// requirement < 0.
DomainEstimationResult conditional_domain_estimation(const VectorObjective& objective, std::size_t dim,
                                                     const DomainEstimationConfig& config);

DomainEstimationResult conditional_domain_estimation(const Objective& antecedent, const Objective& requirement,
                                                     std::size_t dim, const DomainEstimationConfig& config);

} // namespace stlgp
