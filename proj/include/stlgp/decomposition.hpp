#pragma once

#include "stlgp/formula.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace stlgp {

class Skeleton;
using SkeletonPtr = std::shared_ptr<const Skeleton>;

/// Propositional formula over atom indices: the Boolean structure left after
/// the temporal and atomic subformulas have been pulled out.
class Skeleton {
public:
  enum class Kind { Constant, Atom, Not, And, Or };

  static SkeletonPtr constant(bool value);
  static SkeletonPtr atom(std::size_t index);
  static SkeletonPtr negation(SkeletonPtr operand);
  static SkeletonPtr conjunction(SkeletonPtr lhs, SkeletonPtr rhs);
  static SkeletonPtr disjunction(SkeletonPtr lhs, SkeletonPtr rhs);

  Kind kind() const { return kind_; }
  bool value() const { return value_; }
  std::size_t index() const { return index_; }
  const SkeletonPtr& lhs() const { return lhs_; }
  const SkeletonPtr& rhs() const { return rhs_; }

  std::string to_string() const;
  /// Largest atom index referenced plus one (0 when there are no atoms).
  std::size_t atom_bound() const;

  Skeleton(Kind kind, bool value, std::size_t index, SkeletonPtr lhs, SkeletonPtr rhs)
      : kind_(kind), value_(value), index_(index), lhs_(std::move(lhs)), rhs_(std::move(rhs)) {}

private:
  Kind kind_;
  bool value_;
  std::size_t index_;
  SkeletonPtr lhs_;
  SkeletonPtr rhs_;
};

struct Decomposition {
  std::vector<FormulaPtr> atoms;
  SkeletonPtr skeleton;
};

/// Pushes G over conjunctions and F over disjunctions, recursively, until no
/// rewrite applies.
FormulaPtr distribute_temporal(const FormulaPtr& phi);

/// True for atomic predicates and temporal formulas that the rewrites above
/// cannot split any further.
bool is_basic(const Formula& phi);

/// Splits a formula into basic atoms and a Boolean skeleton. Structurally
/// equal atoms are shared. Negations stay in the skeleton.
Decomposition decompose(const FormulaPtr& phi);

/// Rebuilds the STL formula by plugging the atoms into the skeleton.
FormulaPtr substitute(const Skeleton& skeleton, std::span<const FormulaPtr> atoms);

/// Probabilistic approximation: 1-p for not, product for and,
/// inclusion-exclusion for or. Throws ValidationError for probabilities
/// outside [0, 1].
double pas(const Skeleton& skeleton, std::span<const double> atom_probabilities);

/// Boolean value given the truth of each atom.
bool evaluate(const Skeleton& skeleton, const std::vector<bool>& atom_values);

/// Robustness of the rebuilt formula given each atom's robustness, using the
/// same min/max/negation rules as the monitor.
double compose_robustness(const Skeleton& skeleton, std::span<const double> atom_robustness);

} // namespace stlgp
